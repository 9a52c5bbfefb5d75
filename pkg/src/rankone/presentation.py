"""Finite presentations: parsing, Tietze elimination, one-relator HNN splittings."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .freegroup import (
    Alphabet,
    Word,
    WordError,
    compose,
    cyclic_reduce,
    fold,
    contains,
    identity_map,
    substitute,
)

log = logging.getLogger(__name__)


class PresentationSyntaxError(ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Presentation:
    alphabet: Alphabet
    relators: tuple = ()

    def __post_init__(self):
        rels = []
        for r in self.relators:
            if r.max_generator() > self.alphabet.rank:
                raise WordError("relator uses a letter outside the alphabet")
            core, _ = cyclic_reduce(r)
            if core:
                rels.append(core)
            else:
                log.warning("dropping identity relator")
        object.__setattr__(self, "relators", tuple(rels))

    @classmethod
    def from_strings(cls, names, relators=()):
        A = Alphabet(tuple(names))
        return cls(A, tuple(A.parse(r) for r in relators))

    @property
    def generators(self):
        return self.alphabet.names

    @property
    def num_generators(self) -> int:
        return self.alphabet.rank

    @property
    def deficiency(self) -> int:
        return self.alphabet.rank - len(self.relators)

    def exponent_sums(self, i: int) -> list[int]:
        return [r.exponent_sum(i) for r in self.relators]

    def __str__(self):
        rels = ", ".join(self.alphabet.format(r) for r in self.relators)
        return f"< {', '.join(self.alphabet.names)} | {rels} >"


_TOKEN = re.compile(r"\s*(?:(<)|(>)|(\|)|(,)|([A-Za-z_][A-Za-z0-9_]*(?:\^[+-]?\d+)?))")


def parse_presentation(text: str) -> Presentation:
    """Parse ``< t, a | t a t^-1 a^-2 >``.  ``#`` starts a comment."""
    tokens = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        pos = 0
        while pos < len(line):
            if line[pos:].strip() == "":
                break
            m = _TOKEN.match(line, pos)
            if not m or m.end() == pos:
                col = pos + len(line[pos:]) - len(line[pos:].lstrip()) + 1
                raise PresentationSyntaxError(f"unexpected character {line[col - 1]!r}", lineno, col)
            kind = m.lastindex
            tok = m.group(kind)
            tokens.append((kind, tok, lineno, m.start(kind) + 1))
            pos = m.end()

    i = 0

    def expect(kind, what):
        nonlocal i
        if i >= len(tokens):
            last = tokens[-1] if tokens else (0, "", 1, 1)
            raise PresentationSyntaxError(f"expected {what} at end of input", last[2], last[3] + len(last[1]))
        k, tok, ln, col = tokens[i]
        if k != kind:
            raise PresentationSyntaxError(f"expected {what}, found {tok!r}", ln, col)
        i += 1
        return tokens[i - 1]

    expect(1, "'<'")
    names = []
    while True:
        _, tok, ln, col = expect(5, "generator name")
        if "^" in tok or tok == "e":
            raise PresentationSyntaxError(f"invalid generator name {tok!r}", ln, col)
        if tok in names:
            raise PresentationSyntaxError(f"duplicate generator {tok!r}", ln, col)
        names.append(tok)
        if i < len(tokens) and tokens[i][0] == 4:
            i += 1
            continue
        break
    expect(3, "'|'")
    alphabet = Alphabet(tuple(names))
    relators = []
    if i < len(tokens) and tokens[i][0] == 5:
        while True:
            terms = []
            start = tokens[i] if i < len(tokens) else None
            while i < len(tokens) and tokens[i][0] == 5:
                terms.append(tokens[i])
                i += 1
            if not terms:
                k, tok, ln, col = tokens[i] if i < len(tokens) else (0, "", start[2], start[3])
                raise PresentationSyntaxError("empty relator", ln, col)
            for _, tok, ln, col in terms:
                try:
                    alphabet.parse(tok)
                except WordError as exc:
                    raise PresentationSyntaxError(str(exc), ln, col) from None
            relators.append(alphabet.parse(" ".join(t[1] for t in terms)))
            if i < len(tokens) and tokens[i][0] == 4:
                i += 1
                continue
            break
    expect(2, "'>'")
    if i != len(tokens):
        _, tok, ln, col = tokens[i]
        raise PresentationSyntaxError(f"trailing input {tok!r}", ln, col)
    return Presentation(alphabet, tuple(relators))


def format_presentation(p: Presentation) -> str:
    return str(p)


def exponent_sum(p: Presentation, generator: str) -> list[int]:
    return p.exponent_sums(p.alphabet.index(generator))


# ---------------------------------------------------------------------------
# Tietze elimination

@dataclass
class TietzeResult:
    presentation: Presentation
    trace: list
    exhausted: bool = False


def _find_elimination(p: Presentation):
    order = sorted(range(len(p.relators)), key=lambda j: (len(p.relators[j]), j))
    for j in order:
        r = p.relators[j]
        for g in range(p.num_generators):
            occ = [k for k, x in enumerate(r.letters) if abs(x) == g + 1]
            if len(occ) == 1:
                return j, g, occ[0]
    return None


def eliminate_generator(p: Presentation, j: int, g: int, pos: int):
    """Solve relator j for generator g (occurring once, at ``pos``) and substitute."""
    r = p.relators[j].letters
    rot = r[pos:] + r[:pos]
    rest = Word(rot[1:])
    # rot = x^eps rest = 1
    value = ~rest if rot[0] > 0 else rest
    images = []
    for i in range(p.num_generators):
        if i == g:
            images.append(value)
        else:
            k = i if i < g else i - 1
            images.append(Word.gen(k))
    # value is a word in the old alphabet not involving g; renumber it too
    renumber = [Word.gen(i if i < g else i - 1) if i != g else Word() for i in range(p.num_generators)]
    images[g] = substitute(value, renumber)
    names = p.alphabet.names[:g] + p.alphabet.names[g + 1:]
    rels = [substitute(rel, images) for k, rel in enumerate(p.relators) if k != j]
    return Presentation(Alphabet(names), tuple(rels)), images[g]


def tietze_simplify(p: Presentation, budget: int = 1000) -> TietzeResult:
    trace = []
    steps = 0
    while True:
        found = _find_elimination(p)
        if found is None:
            return TietzeResult(p, trace)
        if steps >= budget:
            return TietzeResult(p, trace, exhausted=True)
        j, g, pos = found
        name = p.alphabet.names[g]
        before = len(p.relators)
        q, value = eliminate_generator(p, j, g, pos)
        trace.append({
            "move": "eliminate",
            "generator": name,
            "relator": p.alphabet.format(p.relators[j]),
            "value": q.alphabet.format(value),
        })
        dropped = (before - 1) - len(q.relators)
        if dropped:
            trace.append({"move": "drop-identity-relators", "count": dropped})
        p = q
        steps += 1


# ---------------------------------------------------------------------------
# one-relator HNN splitting

@dataclass
class HnnSplitting:
    """Magnus splitting of a 2-generator 1-relator group over a zero-sum generator.

    ``presentation`` is the (possibly rebased) input; its generator
    ``stable`` has exponent sum zero.  Vertex letters ``a_lo .. a_hi`` stand for
    ``t^i a t^-i``; ``vertex_relator`` is the relator rewritten over them, with
    letter ``k + 1`` meaning ``a_{lo + k}``.
    """

    kind: str
    presentation: Presentation | None = None
    stable: int | None = None
    other: int | None = None
    lo: int = 0
    hi: int = 0
    vertex_relator: Word | None = None
    vertex_generators: list = field(default_factory=list)
    endomorphism: list | None = None  # images of a free basis of the vertex group
    endomorphism_stable_sign: int = 1
    change_of_basis: list = field(default_factory=list)

    @property
    def vertex_rank(self):
        if self.endomorphism is None:
            return None
        return len(self.endomorphism)


def _magnus_rewrite(r: Word, t: int, a: int):
    level = 0
    letters = []
    for x in r.letters:
        if abs(x) == t + 1:
            level += 1 if x > 0 else -1
        else:
            letters.append((level, 1 if x > 0 else -1))
    assert level == 0
    lo = min(l for l, _ in letters)
    w = Word(tuple((l - lo + 1) * s for l, s in letters))
    # a cyclic rotation of r may shift levels; cyclically reduce over vertex letters
    core, _ = cyclic_reduce(w)
    idx = [abs(x) - 1 for x in core.letters]
    lo2, hi2 = min(idx), max(idx)
    core = Word(tuple((abs(x) - lo2) * (1 if x > 0 else -1) for x in core.letters))
    return core, lo + lo2, lo + hi2


def _solve_for(r: Word, letter: int) -> Word:
    """Solve ``r = 1`` for ``letter`` occurring exactly once."""
    pos = next(k for k, x in enumerate(r.letters) if abs(x) == letter)
    rot = r.letters[pos:] + r.letters[:pos]
    rest = Word(rot[1:])
    return ~rest if rot[0] > 0 else rest


def _zero_sum_rebase(p: Presentation):
    """Nielsen moves making one exponent sum vanish; returns (presentation, moves)."""
    r = p.relators[0]
    moves = []
    names = p.alphabet.names
    images = identity_map(2)
    while True:
        s0, s1 = r.exponent_sum(0), r.exponent_sum(1)
        if s0 == 0 or s1 == 0:
            break
        if abs(s0) >= abs(s1):
            # x_1 -> x_1 x_0^-q sends the x_0 sum to s0 - q*s1
            q = s0 // s1
            phi = [Word.gen(0), Word.gen(1) * Word.gen(0, -q)]
            moves.append(f"{names[1]} -> {names[1]} {names[0]}^{-q}")
        else:
            q = s1 // s0
            phi = [Word.gen(0) * Word.gen(1, -q), Word.gen(1)]
            moves.append(f"{names[0]} -> {names[0]} {names[1]}^{-q}")
        r = substitute(r, phi)
        images = compose(phi, images)
    return Presentation(p.alphabet, (r,)), moves, images


def one_relator_hnn_split(p: Presentation) -> HnnSplitting:
    if p.num_generators != 2 or len(p.relators) != 1:
        raise ValueError("splitting needs a 2-generator 1-relator presentation")
    q, moves, _ = _zero_sum_rebase(p)
    r = q.relators[0]
    sums = (r.exponent_sum(0), r.exponent_sum(1))
    t = 0 if sums[0] == 0 else 1
    a = 1 - t
    if not any(abs(x) == a + 1 for x in r.letters):
        # relator is a power of the stable letter with zero sum: impossible when reduced
        return HnnSplitting("not-found", q, t, a, change_of_basis=moves)
    core, lo, hi = _magnus_rewrite(r, t, a)
    t_word = Word.gen(t)
    a_word = Word.gen(a)
    vgens = [t_word ** i * a_word * t_word ** -i for i in range(lo, hi + 1)]
    split = HnnSplitting("both-proper", q, t, a, lo, hi, core, vgens, change_of_basis=moves)
    n = hi - lo + 1
    if n == 1:
        # relator lives in a single vertex letter: edge groups are trivial
        return split
    counts = {k: sum(1 for x in core.letters if abs(x) == k) for k in range(1, n + 1)}
    top_once = counts[n] == 1
    bottom_once = counts[1] == 1
    if top_once:
        # vertex group free on a_lo..a_{hi-1}; t a_i t^-1 = a_{i+1}
        solved = _solve_for(core, n)
        images = [Word.gen(k + 1) for k in range(n - 2)] + [solved]
        split.endomorphism = images
        split.endomorphism_stable_sign = 1
    elif bottom_once:
        # vertex group free on a_{lo+1}..a_hi; t^-1 a_i t = a_{i-1}
        solved = _solve_for(core, 1)
        shifted = Word(tuple((abs(x) - 1) * (1 if x > 0 else -1) for x in solved.letters))
        images = [shifted] + [Word.gen(k - 1) for k in range(1, n - 1)]
        split.endomorphism = images
        split.endomorphism_stable_sign = -1
    if top_once and bottom_once:
        split.kind = "ascending-equal"
    elif top_once or bottom_once:
        split.kind = "ascending-strict"
        if split.endomorphism is not None:
            img = fold(split.endomorphism, n - 1)
            if all(contains(img, Word.gen(k)) for k in range(n - 1)):
                split.kind = "ascending-equal"
    return split
