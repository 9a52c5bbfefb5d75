"""Ascending HNN extensions of free groups.

An injective endomorphism theta of F_r gives G = <t, x_1..x_r | t x_i t^-1 = theta(x_i)>.
This module handles periodic conjugacy classes theta^i(x) = g x^d g^-1, the
primitivity of w when theta(w) = w^d with |d| >= 2, and the search for a
finite-index subgroup whose mod-p first homology has rank at least 3.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from sympy import primefactors

from .freegroup import (
    Alphabet,
    SubgroupGraph,
    Word,
    compose,
    contains,
    express_in_basis,
    fold,
    graph_basis,
    identity_map,
    is_conjugate_to_power,
    is_primitive,
    letter_order,
    primitive_basis_change,
    root,
    substitute,
)
from .homology import GolodShafarevichReport, golod_shafarevich_check, h1_mod_p_rank
from .presentation import Presentation
from .subgroup import (
    BudgetExhausted,
    CosetTable,
    Deadline,
    RewrittenPresentation,
    reidemeister_schreier,
    subgroups_of_index,
)

log = logging.getLogger(__name__)


class NotInjective(ValueError):
    pass


class EndoSyntaxError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class PreconditionError(ValueError):
    pass


class TheoremViolation(RuntimeError):
    """A computation contradicted a proven statement; the inputs are a falsifying instance."""


# ---------------------------------------------------------------------------
# endomorphisms

@dataclass(frozen=True)
class Endomorphism:
    alphabet: Alphabet
    images: tuple

    @property
    def rank(self) -> int:
        return self.alphabet.rank

    def __call__(self, w: Word) -> Word:
        return substitute(w, self.images)

    def then(self, other: "Endomorphism") -> "Endomorphism":
        """``other o self``."""
        return Endomorphism(self.alphabet, tuple(compose(other.images, self.images)))

    def power(self, i: int) -> "Endomorphism":
        if i < 1:
            raise ValueError("power must be positive")
        imgs = list(self.images)
        for _ in range(i - 1):
            imgs = compose(self.images, imgs)
        return Endomorphism(self.alphabet, tuple(imgs))

    def conjugated(self, g: Word) -> "Endomorphism":
        """``y -> g theta(y) g^-1``."""
        return Endomorphism(self.alphabet, tuple(g * y * ~g for y in self.images))

    def format(self) -> str:
        a = self.alphabet
        return "\n".join(f"{n} -> {a.format(w)}" for n, w in zip(a.names, self.images)) + "\n"

    def to_dict(self):
        a = self.alphabet
        return {n: a.format(w) for n, w in zip(a.names, self.images)}


def make_endomorphism(images: Sequence[Word], alphabet: Alphabet | None = None) -> Endomorphism:
    """Build an endomorphism after certifying injectivity by folding the images."""
    r = len(images)
    alphabet = alphabet or Alphabet(tuple(_default_names(r)))
    if alphabet.rank != r:
        raise ValueError("one image per basis letter is required")
    for w in images:
        if w.max_generator() > r:
            raise ValueError("image uses a letter outside the alphabet")
    if fold(list(images), r).rank != r:
        raise NotInjective("images generate a subgroup of smaller rank")
    return Endomorphism(alphabet, tuple(images))


def _default_names(r):
    if r <= 4:
        return ["a", "b", "c", "d"][:r]
    return [f"a{i + 1}" for i in range(r)]


def parse_endomorphism(text: str) -> Endomorphism:
    """Parse the ``.endo`` format: one ``x -> word`` line per basis letter."""
    entries = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise EndoSyntaxError("expected 'x -> word'", n)
        lhs, rhs = (s.strip() for s in line.split("->", 1))
        entries.append((n, lhs, rhs))
    if not entries:
        raise EndoSyntaxError("no images given", 1)
    try:
        alphabet = Alphabet(tuple(lhs for _, lhs, _ in entries))
    except ValueError as exc:
        raise EndoSyntaxError(str(exc), entries[0][0]) from None
    images = []
    for n, _, rhs in entries:
        try:
            images.append(alphabet.parse(rhs))
        except ValueError as exc:
            raise EndoSyntaxError(str(exc), n) from None
    return make_endomorphism(images, alphabet)


def is_surjective(theta: Endomorphism) -> bool:
    g = fold(list(theta.images), theta.rank)
    return all(contains(g, x) for x in identity_map(theta.rank))


def _stable_name(alphabet: Alphabet) -> str:
    for name in ("t", "s", "u", "T"):
        if name not in alphabet.names:
            return name
    k = 0
    while f"t{k}" in alphabet.names:
        k += 1
    return f"t{k}"


def hnn_presentation(theta: Endomorphism, stable: str | None = None) -> Presentation:
    """``< t, x_1..x_r | t x_i t^-1 theta(x_i)^-1 >`` with t as the first generator."""
    stable = stable or _stable_name(theta.alphabet)
    names = (stable,) + tuple(theta.alphabet.names)
    t = Word.gen(0)
    shift = [Word.gen(i + 1) for i in range(theta.rank)]
    rels = []
    for i, img in enumerate(theta.images):
        rels.append(t * shift[i] * ~t * ~substitute(img, shift))
    return Presentation(Alphabet(names), tuple(rels))


def cyclic_cover(theta: Endomorphism, i: int) -> Endomorphism:
    return theta.power(i)


# ---------------------------------------------------------------------------
# periodic conjugacy classes

@dataclass(frozen=True)
class PeriodicWitness:
    x: Word
    g: Word
    d: int
    i: int

    def verify(self, theta: Endomorphism) -> bool:
        if not self.x or self.d == 0 or self.i < 1 or root(self.x)[1] != 1:
            return False
        return theta.power(self.i)(self.x) == self.g * self.x ** self.d * ~self.g

    def to_dict(self, alphabet: Alphabet):
        return {"x": alphabet.format(self.x), "g": alphabet.format(self.g), "d": self.d, "i": self.i}


def conjugacy_candidates(rank: int, max_len: int):
    """Cyclically reduced non-powers up to rotation and inversion, shortlex order.

    Each class is represented by its shortlex-least rotation of x or x^-1.
    Words are built as tuples of positions in ``letter_order``, where the
    inverse of position k is position ``k ^ 1``.
    """
    letters = letter_order(rank)
    m = len(letters)
    for n in range(1, max_len + 1):
        stack = [(k,) for k in reversed(range(m))]
        while stack:
            tup = stack.pop()
            if len(tup) < n:
                first = tup[0]
                for k in reversed(range(first, m)):
                    # a smaller letter (or the inverse of one) would give a smaller rotation
                    if k ^ 1 >= first and k != tup[-1] ^ 1:
                        stack.append(tup + (k,))
                continue
            if n > 1 and tup[0] == tup[-1] ^ 1:
                continue
            inv = tuple(k ^ 1 for k in reversed(tup))
            if any(tup[j:] + tup[:j] < tup for j in range(1, n)):
                continue
            if any(inv[j:] + inv[:j] < tup for j in range(n)):
                continue
            if any(n % p == 0 and tup[p:] + tup[:p] == tup for p in range(1, n)):
                continue
            yield Word(tuple(letters[k] for k in tup))


def find_periodic_conjugacy(theta: Endomorphism, max_i: int = 6, max_len: int = 8,
                            min_abs_d: int = 2) -> PeriodicWitness | None:
    """First witness theta^i(x) = g x^d g^-1 by i, then shortlex x.

    Only exponents with ``|d| >= min_abs_d`` count; pass ``min_abs_d=1`` to
    also report the classes that are periodic up to inversion.
    """
    candidates = list(conjugacy_candidates(theta.rank, max_len))
    power = theta
    for i in range(1, max_i + 1):
        if i > 1:
            power = power.then(theta)
        for x in candidates:
            hit = is_conjugate_to_power(x, power(x))
            if hit and abs(hit[1]) >= min_abs_d:
                wit = PeriodicWitness(x, hit[0], hit[1], i)
                assert wit.verify(theta)
                return wit
    return None


@dataclass(frozen=True)
class NormalizedPair:
    theta_prime: Endomorphism
    w: Word
    d: int


def normalize(theta: Endomorphism, wit: PeriodicWitness) -> NormalizedPair:
    """Pass to theta^i and compose with conjugation by g^-1, so that theta'(w) = w^d."""
    if not wit.verify(theta):
        raise TheoremViolation("periodic witness does not verify")
    tp = theta.power(wit.i).conjugated(~wit.g)
    tp = make_endomorphism(list(tp.images), theta.alphabet)
    if tp(wit.x) != wit.x ** wit.d:
        raise TheoremViolation("normalized map does not send w to w^d")
    return NormalizedPair(tp, wit.x, wit.d)


# ---------------------------------------------------------------------------
# primitivity

class LemmaPreconditionError(PreconditionError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _in_coordinates(S: SubgroupGraph, w: Word) -> Word:
    return express_in_basis(S, graph_basis(S), w)


def lemma_prim_check(H: SubgroupGraph, g: Word, k: int, ambient: SubgroupGraph | None = None) -> bool:
    """Is g^k primitive in H, given g primitive in the ambient group and k minimal?

    ``ambient`` defaults to the whole free group; otherwise it is a subgroup
    containing H and g, and primitivity of g is judged in its basis.
    """
    if k < 1:
        raise LemmaPreconditionError("k must be positive")
    if ambient is None:
        ok = is_primitive(g, H.ambient_rank)[0]
    else:
        if not contains(ambient, g):
            raise LemmaPreconditionError("g is not in the ambient subgroup")
        ok = is_primitive(_in_coordinates(ambient, g), ambient.rank)[0]
    if not ok:
        raise LemmaPreconditionError("g is not primitive in the ambient group")
    for j in range(1, k):
        if contains(H, g ** j):
            raise LemmaPreconditionError(f"g^{j} already lies in H")
    if not contains(H, g ** k):
        raise LemmaPreconditionError(f"g^{k} does not lie in H")
    return is_primitive(_in_coordinates(H, g ** k), H.rank)[0]


@dataclass
class PrimitivityCertificate:
    w: Word
    d: int
    chain: list  # SubgroupGraph stages, chain[0] is the whole group
    terminal_trace: object  # WhiteheadTrace of w in the terminal stage basis
    lemma_checks: list = field(default_factory=list)
    direct_trace: object = None  # WhiteheadTrace of w in the original basis

    @property
    def ranks(self):
        return [s.rank for s in self.chain]

    def to_dict(self, alphabet: Alphabet | None = None):
        fmt = alphabet.format if alphabet else repr
        return {
            "w": fmt(self.w),
            "d": self.d,
            "ranks": self.ranks,
            "terminal_whitehead": self.terminal_trace.to_dict(),
            "lemma_checks": self.lemma_checks,
            "primitive": bool(self.direct_trace and self.direct_trace.primitive),
        }


def prove_primitive(np: NormalizedPair, max_stages: int = 64) -> PrimitivityCertificate:
    """Certify that w is primitive when theta(w) = w^d, |d| >= 2, w not a proper power.

    Builds S_{k+1} = <theta(S_k), w> until the rank stops dropping, certifies
    w primitive in the last stage with Whitehead, then pushes primitivity
    back down the chain via membership checks on the powers of w.
    """
    theta, w, d = np.theta_prime, np.w, np.d
    r = theta.rank
    if abs(d) < 2:
        raise PreconditionError("|d| must be at least 2")
    if not w or root(w)[1] != 1:
        raise PreconditionError("w must be a nontrivial non-power")
    if theta(w) != w ** d:
        raise PreconditionError("theta(w) != w^d")
    k = abs(d)

    chain = [fold(identity_map(r), r)]
    while True:
        S = chain[-1]
        basis = graph_basis(S)
        images = [theta(b) for b in basis]
        # theta restricted to the stage, in stage coordinates, is still normalized
        wk = _in_coordinates(S, w)
        local = [_in_coordinates(S, y) for y in images]
        if substitute(wk, local) != wk ** d:
            raise TheoremViolation("stage endomorphism lost theta(w) = w^d")
        nxt = fold(images + [w], r)
        if nxt.rank == S.rank:
            break
        if nxt.rank < 2:
            raise TheoremViolation("stage rank dropped below 2")
        if len(chain) > max_stages:
            raise BudgetExhausted("too many rank-reduction stages")
        chain.append(nxt)

    terminal = chain[-1]
    ok, trace = is_primitive(_in_coordinates(terminal, w), terminal.rank)
    if not ok:
        raise TheoremViolation("w is not primitive in the terminal stage")

    checks = []
    for j in range(len(chain) - 2, -1, -1):
        H = fold([theta(b) for b in graph_basis(chain[j])], r)
        prim = lemma_prim_check(H, w, k, ambient=chain[j + 1])
        lower = is_primitive(_in_coordinates(chain[j], w), chain[j].rank)[0]
        checks.append({"stage": j, "power_primitive_in_image": prim, "primitive_in_stage": lower})
        if not (prim and lower):
            raise TheoremViolation(f"primitivity failed to descend to stage {j}")

    ok, direct = is_primitive(w, r)
    if not ok:
        raise TheoremViolation("w is not primitive in the free group")
    return PrimitivityCertificate(w, d, chain, trace, checks, direct)


# ---------------------------------------------------------------------------
# virtually sufficient homology witness

INDEX_SCHEDULE = (2, 3, 4, 6, 8, 12)


@dataclass
class VsaWitnessReport:
    status: str  # "found", "not-found" or "budget-exhausted"
    presentation: Presentation | None = None
    prime: int | None = None
    d: int | None = None
    cover: CosetTable | None = None
    rewritten: RewrittenPresentation | None = None
    rank: int | None = None
    gs: GolodShafarevichReport | None = None
    certificate: PrimitivityCertificate | None = None
    trace: list = field(default_factory=list)
    searched_up_to: int = 0

    @property
    def found(self) -> bool:
        return self.status == "found"

    def to_dict(self):
        out = {"status": self.status, "trace": self.trace, "searched_up_to": self.searched_up_to}
        if self.presentation is not None:
            out["presentation"] = str(self.presentation)
        if self.found:
            out.update(
                prime=self.prime,
                d=self.d,
                index=self.cover.index,
                rank=self.rank,
                cover=self.cover.to_json(),
                subgroup_presentation=str(self.rewritten.presentation),
                gs_violated=self.gs.violated,
            )
        return out


def _rebase(theta: Endomorphism, w: Word):
    """Conjugate theta by an automorphism carrying w to the first letter."""
    phi, phi_inv = primitive_basis_change(w, theta.rank)
    images = [substitute(theta(y), phi) for y in phi_inv]
    return make_endomorphism(images, theta.alphabet)


def vsa_witness_strict(theta: Endomorphism, wit: PeriodicWitness, budget_ms=None,
                       schedule: Sequence[int] = INDEX_SCHEDULE) -> VsaWitnessReport:
    """Find a finite-index subgroup H and prime p with dim H_1(H; F_p) >= 3."""
    if theta.rank < 2:
        raise PreconditionError("vertex group must have rank at least 2")
    if abs(wit.d) < 2:
        raise PreconditionError("periodic exponent must satisfy |d| >= 2")
    deadline = Deadline(budget_ms)
    trace = []
    np = normalize(theta, wit)
    trace.append({"step": "normalize", "i": wit.i, "d": np.d})
    cert = prove_primitive(np)
    trace.append({"step": "primitive", "ranks": cert.ranks})
    psi = _rebase(np.theta_prime, np.w)
    d = np.d
    a = Word.gen(0)
    if psi(a) != a ** d:
        raise TheoremViolation("basis change did not send w to the first letter")
    trace.append({"step": "basis-change", "images": list(psi.to_dict().values())})
    if d == 2:
        psi = psi.power(2)
        d = 4
        trace.append({"step": "double-cover", "d": d})
    p = min(primefactors(abs(d - 1)))
    pres = hnn_presentation(psi)
    trace.append({"step": "prime", "p": p})
    must = [Word.gen(0), Word.gen(1)]  # t and a
    report = VsaWitnessReport("not-found", presentation=pres, prime=p, d=d, certificate=cert, trace=trace)
    prev = 1
    try:
        for bound in schedule:
            for n in range(prev + 1, bound + 1):
                for t in subgroups_of_index(pres, n, must, deadline=deadline):
                    rs = reidemeister_schreier(pres, t)
                    rank = h1_mod_p_rank(rs.presentation, p)
                    trace.append({"step": "candidate", "index": n, "rank": rank})
                    if rank >= 3:
                        report.status = "found"
                        report.cover, report.rewritten, report.rank = t, rs, rank
                        report.gs = golod_shafarevich_check(rs.presentation, p)
                        report.searched_up_to = n
                        return report
                report.searched_up_to = n
            prev = bound
    except BudgetExhausted:
        report.status = "budget-exhausted"
    return report
