"""Generalized Baumslag-Solitar graphs.

Every vertex and edge group is infinite cyclic.  An edge ``(u, v, l, r)``
sends the edge generator to ``a_u^l`` at its origin and ``a_v^r`` at its
terminus; when the edge is not in the spanning tree its stable letter sits on
the terminus side, ``a_u^l = t a_v^r t^-1``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import gcd, prod

from .freegroup import Alphabet, Word, substitute
from .presentation import Presentation


class GbsSyntaxError(ValueError):
    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NotCoprime(ValueError):
    pass


@dataclass(frozen=True)
class GbsEdge:
    u: str
    v: str
    l: int
    r: int

    @property
    def is_loop(self) -> bool:
        return self.u == self.v

    def reversed(self) -> "GbsEdge":
        return GbsEdge(self.v, self.u, self.r, self.l)


def _vertex_key(v: str):
    return (0, int(v), "") if v.lstrip("-").isdigit() else (1, 0, v)


@dataclass(frozen=True)
class GbsGraph:
    vertices: tuple
    edges: tuple

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValueError("duplicate vertex")
        for e in self.edges:
            if e.l == 0 or e.r == 0:
                raise ValueError("edge labels must be nonzero")
            if e.u not in vs or e.v not in vs:
                raise ValueError(f"edge endpoint not a vertex: {e}")
        if not self.vertices:
            raise ValueError("graph has no vertices")
        if not self.is_connected():
            raise ValueError("graph is not connected")

    @classmethod
    def from_edges(cls, edges, vertices=()):
        es = tuple(GbsEdge(str(u), str(v), int(l), int(r)) for u, v, l, r in edges)
        vs = list(map(str, vertices))
        for e in es:
            for x in (e.u, e.v):
                if x not in vs:
                    vs.append(x)
        return cls(tuple(vs), es)

    def is_connected(self) -> bool:
        adj = {v: set() for v in self.vertices}
        for e in self.edges:
            adj[e.u].add(e.v)
            adj[e.v].add(e.u)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for y in adj[stack.pop()]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(self.vertices)

    def degree(self, v: str) -> int:
        return sum((e.u == v) + (e.v == v) for e in self.edges)

    def is_reduced(self) -> bool:
        return all(e.is_loop or (abs(e.l) != 1 and abs(e.r) != 1) for e in self.edges)

    def format(self) -> str:
        lines = [f"vertex {v}" for v in self.vertices if self.degree(v) == 0]
        lines += [f"edge {e.u} {e.v} {e.l} {e.r}" for e in self.edges]
        return "\n".join(lines) + "\n"

    def presentation(self) -> Presentation:
        """Fundamental group: one generator per vertex, one stable letter per non-tree edge."""
        tree = set()
        seen = {self.vertices[0]}
        q = deque([self.vertices[0]])
        while q:
            x = q.popleft()
            for k, e in enumerate(self.edges):
                if e.is_loop or k in tree:
                    continue
                for a, b in ((e.u, e.v), (e.v, e.u)):
                    if a == x and b not in seen:
                        seen.add(b)
                        tree.add(k)
                        q.append(b)
        names = [f"a{v}" if not v.startswith("a") else v for v in self.vertices]
        stables = [k for k in range(len(self.edges)) if k not in tree]
        tnames = ["t"] if len(stables) == 1 else [f"t{j + 1}" for j in range(len(stables))]
        while set(tnames) & set(names):
            tnames = ["_" + n for n in tnames]
        alphabet = Alphabet(tuple(names) + tuple(tnames))
        idx = {v: i for i, v in enumerate(self.vertices)}
        rels = []
        for k, e in enumerate(self.edges):
            lhs = Word.gen(idx[e.u], e.l)
            rhs = Word.gen(idx[e.v], e.r)
            if k not in tree:
                t = Word.gen(len(names) + stables.index(k))
                rhs = t * rhs * ~t
            rels.append(lhs * ~rhs)
        return Presentation(alphabet, tuple(rels))


def parse_gbs(text: str) -> GbsGraph:
    """Parse ``edge u v l r`` lines (a loop when u = v) and optional ``vertex v`` lines."""
    edges, vertices = [], []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "vertex" and len(parts) == 2:
            vertices.append(parts[1])
        elif parts[0] == "edge" and len(parts) == 5:
            try:
                l, r = int(parts[3]), int(parts[4])
            except ValueError:
                raise GbsSyntaxError("labels must be integers", n) from None
            if l == 0 or r == 0:
                raise GbsSyntaxError("labels must be nonzero", n)
            edges.append((parts[1], parts[2], l, r))
        else:
            raise GbsSyntaxError(f"cannot parse {line!r}", n)
    if not edges and not vertices:
        raise GbsSyntaxError("empty graph", 1)
    try:
        return GbsGraph.from_edges(edges, vertices)
    except ValueError as exc:
        raise GbsSyntaxError(str(exc), 1) from None


# ---------------------------------------------------------------------------
# reduction and the small cases

def _collapsible(e: GbsEdge):
    """(removed vertex, kept vertex, factor) for a collapsible edge, else None."""
    if e.is_loop:
        return None
    if abs(e.l) == 1:
        return e.u, e.v, e.l * e.r
    if abs(e.r) == 1:
        return e.v, e.u, e.r * e.l
    return None


def collapse(g: GbsGraph, k: int) -> GbsGraph:
    """Contract edge k, whose edge group equals the vertex group at one end."""
    hit = _collapsible(g.edges[k])
    if hit is None:
        raise ValueError("edge is not collapsible")
    gone, keep, f = hit
    edges = []
    for j, e in enumerate(g.edges):
        if j == k:
            continue
        u, v, l, r = e.u, e.v, e.l, e.r
        if u == gone:
            u, l = keep, l * f
        if v == gone:
            v, r = keep, r * f
        edges.append(GbsEdge(u, v, l, r))
    return GbsGraph(tuple(x for x in g.vertices if x != gone), tuple(edges))


def reduce_gbs(g: GbsGraph, order=None):
    """Collapse edges until reduced; returns ``(graph, trace)``.

    By default the first collapsible edge in input order goes first; ``order``
    (a callable picking an index from the candidate list) allows other orders.
    """
    trace = []
    while True:
        cands = [k for k, e in enumerate(g.edges) if _collapsible(e)]
        if not cands:
            return g, trace
        k = order(cands) if order else cands[0]
        e = g.edges[k]
        gone, keep, f = _collapsible(e)
        trace.append({"collapse": f"edge {e.u} {e.v} {e.l} {e.r}", "removed": gone, "into": keep,
                      "factor": f})
        g = collapse(g, k)


SMALL_Z = "small-Z"
SMALL_KLEIN = "small-Klein-type"
SMALL_BS = "small-soluble-BS"
H2B_INFINITE = "infinite-dim-H2b"


@dataclass
class GbsVerdict:
    label: str
    reduced: GbsGraph
    trace: list
    acylindrically_hyperbolic: bool = False  # never, for any GBS group

    def to_dict(self):
        return {
            "label": self.label,
            "acylindrically_hyperbolic": self.acylindrically_hyperbolic,
            "reduced": [[e.u, e.v, e.l, e.r] for e in self.reduced.edges],
            "vertices": list(self.reduced.vertices),
            "trace": self.trace,
        }


def classify_gbs(g: GbsGraph) -> GbsVerdict:
    red, trace = reduce_gbs(g)
    es = red.edges
    if not es and len(red.vertices) == 1:
        label = SMALL_Z
    elif len(es) == 1 and not es[0].is_loop and abs(es[0].l) == 2 and abs(es[0].r) == 2:
        label = SMALL_KLEIN
    elif len(es) == 1 and es[0].is_loop and (abs(es[0].l) == 1 or abs(es[0].r) == 1):
        label = SMALL_BS
    else:
        label = H2B_INFINITE
    return GbsVerdict(label, red, trace)


# ---------------------------------------------------------------------------
# circles

@dataclass(frozen=True)
class CircleData:
    labels: tuple  # ((l_1, r_1), ..., (l_n, r_n)) along the oriented circle
    vertices: tuple = ()

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def Lprod(self) -> int:
        return prod(l for l, _ in self.labels)

    @property
    def Rprod(self) -> int:
        return prod(r for _, r in self.labels)

    @property
    def coprime(self) -> bool:
        return gcd(abs(self.Lprod), abs(self.Rprod)) == 1

    def to_dict(self):
        return {"n": self.n, "labels": [list(x) for x in self.labels], "L": self.Lprod,
                "R": self.Rprod, "coprime": self.coprime}


def circle_criterion(g: GbsGraph) -> CircleData | None:
    """Circle data if the graph is a circle, oriented canonically; else None."""
    V, E = len(g.vertices), len(g.edges)
    if V != E or any(g.degree(v) != 2 for v in g.vertices):
        return None
    start = min(g.vertices, key=_vertex_key)
    walks = []
    for first in [k for k, e in enumerate(g.edges) if start in (e.u, e.v)]:
        e = g.edges[first]
        starts = [e, e.reversed()] if e.is_loop else [e if e.u == start else e.reversed()]
        for oriented in starts:
            labels, verts, used = [(oriented.l, oriented.r)], [start], {first}
            here = oriented.v
            while here != start:
                k = next(j for j, f in enumerate(g.edges) if j not in used and here in (f.u, f.v))
                used.add(k)
                f = g.edges[k]
                f = f if f.u == here else f.reversed()
                labels.append((f.l, f.r))
                verts.append(here)
                here = f.v
            walks.append((tuple(labels), tuple(verts)))
    labels, verts = min(walks)
    return CircleData(labels, verts)


def _names(n):
    return ["a"] if n == 1 else [f"a{i + 1}" for i in range(n)]


def circle_presentation(c: CircleData) -> Presentation:
    """``< a_1..a_n, t | a_i^l_i = a_{i+1}^r_i, a_n^l_n = t a_1^r_n t^-1 >``."""
    n = c.n
    alphabet = Alphabet(tuple(_names(n)) + ("t",))
    t = Word.gen(n)
    rels = []
    for i, (l, r) in enumerate(c.labels):
        if i < n - 1:
            rels.append(Word.gen(i, l) * Word.gen(i + 1, -r))
        else:
            rels.append(Word.gen(i, l) * ~(t * Word.gen(0, r) * ~t))
    return Presentation(alphabet, tuple(rels))


TA = Alphabet(("t", "a"))
_T, _A = Word.gen(0), Word.gen(1)


@dataclass
class QuotientRelation:
    relation: Word  # over TA
    R: int
    L: int
    steps: list
    conclusion: str

    def to_dict(self):
        return {"relation": TA.format(self.relation), "R": self.R, "L": self.L,
                "steps": self.steps, "conclusion": self.conclusion}


def _require_coprime(c: CircleData):
    if not c.coprime:
        raise NotCoprime(f"L = {c.Lprod} and R = {c.Rprod} are not coprime")


def quotient_relation(c: CircleData) -> QuotientRelation:
    """The relation t a_1^R t^-1 = a_1^L, with its derivation along the circle."""
    _require_coprime(c)
    n = c.n
    ls = [l for l, _ in c.labels]
    rs = [r for _, r in c.labels]
    steps = []
    for i in range(2, n + 1):
        steps.append({
            "identity": f"a{i}^{prod(rs[:i - 1])} = a1^{prod(ls[:i - 1])}",
            "by": f"relators 1..{i - 1} of the circle",
        })
    for i in range(1, n + 1):
        steps.append({
            "identity": f"a{i}^{prod(ls[i - 1:])} = t a1^{prod(rs[i - 1:])} t^-1",
            "by": f"relators {i}..{n} of the circle",
        })
    R, L = c.Rprod, c.Lprod
    rel = _T * Word.gen(1, R) * ~_T * Word.gen(1, -L)
    return QuotientRelation(rel, R, L, steps, f"G is a quotient of BS({R},{L})")


def _bezout(x: int, y: int):
    """(u, v) with u x + v y = 1 and |u| + |v| minimal."""
    best = None
    bound = abs(x) + abs(y) + 1
    for u in range(-bound, bound + 1):
        rest = 1 - u * x
        if y and rest % y == 0:
            v = rest // y
            key = (abs(u) + abs(v), -u, v)
            if best is None or key < best[0]:
                best = (key, u, v)
    if best is None:
        raise NotCoprime(f"{x} and {y} are not coprime")
    return best[1], best[2]


@dataclass
class TwoGeneratorReduction:
    presentation: Presentation
    substitutions: dict  # eliminated generator -> word over TA
    trace: list

    def to_dict(self):
        return {
            "presentation": str(self.presentation),
            "substitutions": {k: TA.format(w) for k, w in self.substitutions.items()},
            "trace": self.trace,
        }


def _euclid(x: int, X: Word, y: int, Y: Word, trace: list):
    """Nielsen-reduce b^x = X, b^y = Y (gcd 1) to b = u plus one relator."""
    if x < 0:
        x, X = -x, ~X
    if y < 0:
        y, Y = -y, ~Y
    while True:
        if x == 1 or y == 1:
            (one, U), (m, M) = ((x, X), (y, Y)) if x == 1 else ((y, Y), (x, X))
            return U, U ** m * ~M
        swap = x < y
        if swap:
            x, X, y, Y = y, Y, x, X
        q, rem = divmod(x, y)
        new = X * Y ** (-q)
        trace.append({"move": "nielsen", "equation": f"b^{rem} = {TA.format(new)}",
                      "from": f"b^{x} b^-{q * y}"})
        if rem == 1:
            keep = (x, X) if q == 1 else (y, Y)
            return new, new ** keep[0] * ~keep[1]
        x, X = rem, new


def two_generator_reduction(c: CircleData) -> TwoGeneratorReduction:
    """Eliminate a_2..a_n to get a presentation on t and a = a_1.

    With two edges this is a Nielsen-style Euclidean algorithm and ends with
    one relator.  With more edges each a_i is replaced by a Bezout word in
    t and a, and all n relators are kept.
    """
    _require_coprime(c)
    n = c.n
    if n < 2:
        raise ValueError("a circle with one edge has nothing to eliminate")
    ls = [l for l, _ in c.labels]
    rs = [r for _, r in c.labels]
    trace = []
    if n == 2:
        (l1, r1), (l2, r2) = c.labels
        X = _A ** l1  # b^r1 = a^l1
        Y = _T * _A ** r2 * ~_T  # b^l2 = t a^r2 t^-1
        trace.append({"move": "start", "equation": f"b^{r1} = {TA.format(X)}"})
        trace.append({"move": "start", "equation": f"b^{l2} = {TA.format(Y)}"})
        b, rel = _euclid(r1, X, l2, Y, trace)
        trace.append({"move": "eliminate", "generator": "a2", "value": TA.format(b)})
        pres = Presentation(TA, (rel,))
        return TwoGeneratorReduction(pres, {"a2": b}, trace)
    images = [_A]
    for i in range(2, n + 1):
        P, Q = prod(rs[:i - 1]), prod(ls[i - 1:])
        u, v = _bezout(P, Q)
        A_i = _A ** prod(ls[:i - 1])
        B_i = _T * _A ** prod(rs[i - 1:]) * ~_T
        w = A_i ** u * B_i ** v
        trace.append({"move": "bezout", "generator": f"a{i}", "coefficients": [u, v],
                      "value": TA.format(w)})
        images.append(w)
    src = circle_presentation(c)
    rels = tuple(substitute(r, images + [_T]) for r in src.relators)
    subs = {f"a{i + 1}": images[i] for i in range(1, n)}
    return TwoGeneratorReduction(Presentation(TA, rels), subs, trace)
