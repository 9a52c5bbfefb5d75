"""Word algebra in free groups of finite rank.

Letters are nonzero integers: ``i + 1`` is the i-th generator and ``-(i + 1)``
its inverse.  Every :class:`Word` is freely reduced on construction, so
structural equality is equality in the free group.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx


class WordError(ValueError):
    pass


class NotInSubgroup(ValueError):
    pass


def _free_reduce(letters) -> tuple:
    out: list[int] = []
    for x in letters:
        if not isinstance(x, int) or x == 0:
            raise WordError(f"invalid letter {x!r}")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class Word:
    letters: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", _free_reduce(self.letters))

    @classmethod
    def gen(cls, i: int, power: int = 1) -> "Word":
        """The word ``x_i ** power`` (0-based generator index)."""
        x = i + 1 if power > 0 else -(i + 1)
        return cls((x,) * abs(power))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __bool__(self):
        return bool(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __invert__(self) -> "Word":
        return Word(tuple(-x for x in reversed(self.letters)))

    inverse = __invert__

    def __pow__(self, k: int) -> "Word":
        if k < 0:
            return (~self) ** (-k)
        core, conj = cyclic_reduce(self)
        return Word(conj.letters + core.letters * k + (~conj).letters)

    def conjugate(self, g: "Word") -> "Word":
        """``g self g^-1``."""
        return g * self * ~g

    def max_generator(self) -> int:
        return max((abs(x) for x in self.letters), default=0)

    def exponent_sum(self, i: int) -> int:
        return sum(1 if x > 0 else -1 for x in self.letters if abs(x) == i + 1)

    def shortlex_key(self):
        return (len(self.letters), tuple(_letter_key(x) for x in self.letters))

    def __repr__(self):
        return f"Word({list(self.letters)})"


IDENTITY = Word()


def _letter_key(x: int):
    # order x1 < x1^-1 < x2 < x2^-1 < ...
    return 2 * (abs(x) - 1) + (x < 0)


def letter_order(rank: int) -> list[int]:
    """All letters of F_rank in the order x1, x1^-1, x2, x2^-1, ..."""
    out = []
    for i in range(1, rank + 1):
        out += [i, -i]
    return out


def reduce(raw: Iterable, rank: int | None = None) -> Word:
    """Freely reduce a raw letter sequence.

    Entries are either signed integer letters or ``(index, sign)`` pairs with a
    0-based generator index.
    """
    letters = []
    for item in raw:
        if isinstance(item, tuple):
            i, s = item
            if s not in (1, -1) or i < 0:
                raise WordError(f"bad signed letter {item!r}")
            item = (i + 1) * s
        if rank is not None and not 0 < abs(item) <= rank:
            raise WordError(f"unknown generator index {abs(item) - 1}")
        letters.append(item)
    return Word(tuple(letters))


# ---------------------------------------------------------------------------
# naming and parsing

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_TERM = re.compile(rf"^({_IDENT})(?:\^([+-]?\d+))?$")


@dataclass(frozen=True)
class Alphabet:
    names: tuple

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(set(names)) != len(names):
            raise WordError(f"duplicate generator names in {names}")
        for n in names:
            if not re.fullmatch(_IDENT, n) or n == "e":
                raise WordError(f"invalid generator name {n!r}")

    @property
    def rank(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise WordError(f"unknown generator {name!r}") from None

    def gens(self) -> list[Word]:
        return [Word.gen(i) for i in range(self.rank)]

    def parse(self, text: str) -> Word:
        """Parse ``t a^-3 t^-1 b^2``; ``e`` is the identity."""
        letters: list[int] = []
        for term in text.split():
            if term == "e":
                continue
            m = _TERM.match(term)
            if not m:
                raise WordError(f"cannot parse term {term!r}")
            i = self.index(m.group(1))
            k = int(m.group(2)) if m.group(2) is not None else 1
            if k == 0:
                raise WordError(f"zero exponent in {term!r}")
            letters += [(i + 1) if k > 0 else -(i + 1)] * abs(k)
        return Word(tuple(letters))

    def format(self, w: Word) -> str:
        if not w:
            return "e"
        terms = []
        letters = w.letters
        j = 0
        while j < len(letters):
            k = j
            while k < len(letters) and letters[k] == letters[j]:
                k += 1
            x, run = letters[j], k - j
            if abs(x) > self.rank:
                raise WordError(f"letter {x} outside alphabet {self.names}")
            name = self.names[abs(x) - 1]
            power = run if x > 0 else -run
            terms.append(name if power == 1 else f"{name}^{power}")
            j = k
        return " ".join(terms)


# ---------------------------------------------------------------------------
# cyclic words, roots, conjugacy

def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Return ``(core, conjugator)`` with ``w = conjugator core conjugator^-1``."""
    L = w.letters
    k = 0
    while 2 * k + 1 < len(L) and L[k] == -L[len(L) - 1 - k]:
        k += 1
    return Word(L[k:len(L) - k]), Word(L[:k])


def is_cyclically_reduced(w: Word) -> bool:
    return len(w) <= 1 or w.letters[0] != -w.letters[-1]


def rotations(w: Word) -> list[Word]:
    L = w.letters
    return [Word(L[i:] + L[:i]) for i in range(len(L))] or [w]


def root(w: Word) -> tuple[Word, int]:
    """Return ``(u, k)`` with ``w = u^k``, ``k`` maximal."""
    if not w:
        raise WordError("the identity has no root")
    core, conj = cyclic_reduce(w)
    L = core.letters
    n = len(L)
    for p in range(1, n + 1):
        if n % p == 0 and L[:p] * (n // p) == L:
            return conj * Word(L[:p]) * ~conj, n // p
    raise AssertionError("unreachable")


def is_proper_power(w: Word) -> bool:
    return root(w)[1] > 1


def cyclic_canonical(w: Word) -> tuple:
    """Canonical key of the conjugacy class of ``w`` up to inversion."""
    core, _ = cyclic_reduce(w)
    fwd = tuple(_letter_key(x) for x in core.letters)
    back = tuple(_letter_key(-x) for x in reversed(core.letters))
    n = len(fwd)
    best = min(min(k[i:] + k[:i] for i in range(n)) for k in (fwd, back)) if n else ()
    return (n, best)


def is_conjugate_to_power(x: Word, y: Word):
    """Find ``(g, d)`` with ``y = g x^d g^-1`` and ``d != 0``, or ``None``."""
    if not x:
        raise WordError("x must not be the identity")
    cx, gx = cyclic_reduce(x)
    cy, gy = cyclic_reduce(y)
    if not cy or len(cy) % len(cx):
        return None
    m = len(cy) // len(cx)
    for d in (m, -m):
        target = (cx ** d).letters  # cyclically reduced
        for i in range(len(target)):
            if target[i:] + target[:i] == cy.letters:
                p = Word(target[:i])
                g = gy * ~p * ~gx
                assert g * x ** d * ~g == y
                return g, d
    return None


# ---------------------------------------------------------------------------
# maps between free groups

def substitute(w: Word, images: Sequence[Word]) -> Word:
    """Image of ``w`` under the homomorphism sending generator i to images[i]."""
    out: list[int] = []
    for x in w.letters:
        img = images[abs(x) - 1]
        out.extend(img.letters if x > 0 else (~img).letters)
    return Word(tuple(out))


def compose(f: Sequence[Word], g: Sequence[Word]) -> list[Word]:
    """Images of ``f o g`` (apply g first)."""
    return [substitute(gi, f) for gi in g]


def identity_map(rank: int) -> list[Word]:
    return [Word.gen(i) for i in range(rank)]


# ---------------------------------------------------------------------------
# Whitehead's algorithm

def whitehead_images(rank: int, mult: int, cut: frozenset) -> list[Word]:
    """Images of the Whitehead automorphism ``(cut, mult)``.

    ``cut`` contains ``mult`` and not ``-mult``.  A generator x outside
    ``{mult, -mult}`` goes to ``x a`` if only x is in the cut, ``a^-1 x`` if
    only ``x^-1`` is, ``a^-1 x a`` if both are.
    """
    a = Word((mult,))
    images = []
    for i in range(1, rank + 1):
        x = Word((i,))
        if i == abs(mult):
            images.append(x)
            continue
        left = -i in cut
        right = i in cut
        img = x
        if right:
            img = img * a
        if left:
            img = ~a * img
        images.append(img)
    return images


def whitehead_inverse(mult: int, cut: frozenset) -> tuple[int, frozenset]:
    return -mult, frozenset((cut - {mult}) | {-mult})


def _whitehead_graph(core: Word, rank: int) -> nx.DiGraph:
    G = nx.DiGraph()
    G.add_nodes_from(letter_order(rank))
    L = core.letters
    n = len(L)
    for i in range(n):
        u, v = L[i], -L[(i + 1) % n]
        for s, t in ((u, v), (v, u)):
            if G.has_edge(s, t):
                G[s][t]["capacity"] += 1
            else:
                G.add_edge(s, t, capacity=1)
    return G


def _degree(G: nx.DiGraph, v: int) -> int:
    return sum(d["capacity"] for _, _, d in G.out_edges(v, data=True))


def _reducing_move(core: Word, rank: int):
    """A Whitehead automorphism shortening the cyclic word ``core``, or None."""
    G = _whitehead_graph(core, rank)
    for a in letter_order(rank):
        deg = _degree(G, a)
        if deg == 0:
            continue
        value, (side, _) = nx.minimum_cut(G, a, -a)
        if value < deg:
            return a, frozenset(side)
    return None


@dataclass
class WhiteheadTrace:
    """Length-reducing Whitehead moves applied to a cyclic word."""

    rank: int
    word: Word
    steps: list = field(default_factory=list)  # (mult, cut)
    cores: list = field(default_factory=list)
    primitive: bool = False

    @property
    def final(self) -> Word:
        return self.cores[-1]

    def replay(self) -> bool:
        core, _ = cyclic_reduce(self.word)
        if core != self.cores[0]:
            return False
        for (mult, cut), nxt in zip(self.steps, self.cores[1:]):
            new, _ = cyclic_reduce(substitute(core, whitehead_images(self.rank, mult, cut)))
            if new != nxt or len(new) >= len(core):
                return False
            core = new
        return self.primitive == (len(core) == 1)

    def to_dict(self):
        return {
            "rank": self.rank,
            "word": list(self.word.letters),
            "steps": [{"multiplier": m, "cut": sorted(c)} for m, c in self.steps],
            "lengths": [len(c) for c in self.cores],
            "primitive": self.primitive,
        }


def whitehead_minimize(w: Word, rank: int | None = None) -> WhiteheadTrace:
    if not w:
        raise WordError("the identity is not primitive")
    rank = rank if rank is not None else w.max_generator()
    core, _ = cyclic_reduce(w)
    trace = WhiteheadTrace(rank, w, cores=[core])
    while len(core) > 1:
        move = _reducing_move(core, rank)
        if move is None:
            break
        new, _ = cyclic_reduce(substitute(core, whitehead_images(rank, *move)))
        if len(new) >= len(core):
            raise AssertionError("Whitehead cut did not shorten the word")
        trace.steps.append(move)
        trace.cores.append(new)
        core = new
    trace.primitive = len(core) == 1
    return trace


def is_primitive(w: Word, rank: int | None = None) -> tuple[bool, WhiteheadTrace]:
    trace = whitehead_minimize(w, rank)
    return trace.primitive, trace


def primitive_basis_change(w: Word, rank: int) -> tuple[list[Word], list[Word]]:
    """An automorphism ``phi`` with ``phi(w) = x_1`` and its inverse.

    Raises ``WordError`` if ``w`` is not primitive.
    """
    ok, trace = is_primitive(w, rank)
    if not ok:
        raise WordError("word is not primitive")
    phi = identity_map(rank)
    phi_inv = identity_map(rank)
    for mult, cut in trace.steps:
        phi = compose(whitehead_images(rank, mult, cut), phi)
        phi_inv = compose(phi_inv, whitehead_images(rank, *whitehead_inverse(mult, cut)))
    v = substitute(w, phi)
    core, g = cyclic_reduce(v)
    # inner automorphism by g^-1
    phi = [~g * y * g for y in phi]
    phi_inv = compose(phi_inv, [g * Word((i,)) * ~g for i in range(1, rank + 1)])
    (x,) = core.letters
    # send x^sign to x_1 by swapping generators |x| and 1
    j = abs(x)
    perm = identity_map(rank)
    perm_inv = identity_map(rank)
    s = 1 if x > 0 else -1
    perm[j - 1] = Word.gen(0, s)
    perm_inv[0] = Word.gen(j - 1, s)
    if j != 1:
        perm[0] = Word.gen(j - 1)
        perm_inv[j - 1] = Word.gen(0)
    phi = compose(perm, phi)
    phi_inv = compose(phi_inv, perm_inv)
    assert substitute(w, phi) == Word.gen(0)
    assert compose(phi, phi_inv) == identity_map(rank)
    return phi, phi_inv


# ---------------------------------------------------------------------------
# Stallings folding

@dataclass(frozen=True, eq=False)
class SubgroupGraph:
    """Folded core graph of a finitely generated subgroup.

    Vertex 0 is the base; vertices are numbered in breadth-first order from the
    base, so two graphs of the same subgroup are structurally identical.
    ``out[v]`` maps a signed letter to the target vertex.
    """

    ambient_rank: int
    out: tuple

    @property
    def num_vertices(self) -> int:
        return len(self.out)

    @property
    def num_edges(self) -> int:
        return sum(1 for d in self.out for x in d if x > 0)

    @property
    def rank(self) -> int:
        return self.num_edges - self.num_vertices + 1

    def edge_key(self):
        return tuple(tuple(sorted(d.items())) for d in self.out)

    def __eq__(self, other):
        return isinstance(other, SubgroupGraph) and self.edge_key() == other.edge_key()

    def __hash__(self):
        return hash(self.edge_key())

    def is_finite_index(self) -> bool:
        return all(len(d) == 2 * self.ambient_rank for d in self.out)

    def _tree(self):
        order = letter_order(self.ambient_rank)
        parent = {0: None}
        paths = {0: IDENTITY}
        q = deque([0])
        tree = set()
        while q:
            v = q.popleft()
            for x in order:
                u = self.out[v].get(x)
                if u is not None and u not in parent:
                    parent[u] = v
                    paths[u] = paths[v] * Word((x,))
                    tree.add((v, x, u) if x > 0 else (u, -x, v))
                    q.append(u)
        return paths, tree

    def _cotree(self):
        paths, tree = self._tree()
        edges = []
        for v, d in enumerate(self.out):
            for x in sorted(x for x in d if x > 0):
                e = (v, x, d[x])
                if e not in tree:
                    edges.append(e)
        return paths, edges


def _letters_rank(words) -> int:
    return max((w.max_generator() for w in words), default=0)


def fold(generators: Sequence[Word], ambient_rank: int | None = None) -> SubgroupGraph:
    if ambient_rank is None:
        ambient_rank = _letters_rank(generators)
    out: list[dict] = [dict()]
    parent = [0]
    size = [1]

    def new_vertex():
        out.append(dict())
        parent.append(len(parent))
        size.append(1)
        return len(out) - 1

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    pending: list = []

    def attach(u, x, v):
        if x in out[u]:
            if out[u][x] != v:
                pending.append((out[u][x], v))
            return
        if -x in out[v]:
            if out[v][-x] != u:
                pending.append((out[v][-x], u))
            return
        out[u][x] = v
        out[v][-x] = u

    def merge(a, b):
        a, b = find(a), find(b)
        if a == b:
            return
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
        edges = list(out[b].items())
        out[b] = {}
        for x, t in edges:
            if t != b and out[t].get(-x) == b:
                del out[t][-x]
        for x, t in edges:
            attach(a, x, a if t == b else t)

    for w in generators:
        if not w:
            continue
        v = 0
        for j, x in enumerate(w.letters):
            u = 0 if j == len(w) - 1 else new_vertex()
            attach(find(v), x, find(u))
            while pending:
                merge(*pending.pop())
            v = u

    base = find(0)
    alive = {find(v) for v in range(len(out))}
    # trim hanging trees away from the base
    changed = True
    while changed:
        changed = False
        for v in list(alive):
            if v != base and len(out[v]) <= 1:
                for x, t in out[v].items():
                    del out[t][-x]
                out[v] = {}
                alive.discard(v)
                changed = True
    # breadth-first renumbering
    order = letter_order(ambient_rank)
    number = {base: 0}
    q = deque([base])
    while q:
        v = q.popleft()
        for x in order:
            u = out[v].get(x)
            if u is not None and u not in number:
                number[u] = len(number)
                q.append(u)
    new_out = [None] * len(number)
    for v, i in number.items():
        new_out[i] = {x: number[t] for x, t in out[v].items()}
    return SubgroupGraph(ambient_rank, tuple(new_out))


def contains(g: SubgroupGraph, w: Word) -> bool:
    v = 0
    for x in w.letters:
        v = g.out[v].get(x)
        if v is None:
            return False
    return v == 0


def graph_basis(g: SubgroupGraph) -> list[Word]:
    paths, cotree = g._cotree()
    return [paths[u] * Word((x,)) * ~paths[v] for u, x, v in cotree]


def express_in_basis(g: SubgroupGraph, basis: Sequence[Word], w: Word) -> Word:
    """Rewrite ``w`` as a word in ``basis`` (which must be ``graph_basis(g)``)."""
    paths, cotree = g._cotree()
    if list(basis) != [paths[u] * Word((x,)) * ~paths[v] for u, x, v in cotree]:
        raise ValueError("basis is not the spanning-tree basis of this graph")
    index = {e: k + 1 for k, e in enumerate(cotree)}
    v = 0
    out = []
    for x in w.letters:
        u = g.out[v].get(x)
        if u is None:
            raise NotInSubgroup("word leaves the subgroup graph")
        e = (v, x, u) if x > 0 else (u, -x, v)
        k = index.get(e)
        if k is not None:
            out.append(k if x > 0 else -k)
        v = u
    if v != 0:
        raise NotInSubgroup("word does not return to the base vertex")
    return Word(tuple(out))
