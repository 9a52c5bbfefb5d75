"""Verdict pipelines for deficiency-one and one-relator presentations.

Each verdict carries machine-checked certificates (subgroup tables, primes,
ranks, splittings) and citation tags naming the result whose hypotheses
were checked.  Bounded cohomology itself is never computed.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from math import gcd

from .freegroup import Word, cyclic_canonical, substitute
from .gbs import CircleData, quotient_relation, two_generator_reduction
from .hnn import (
    PreconditionError,
    TheoremViolation,
    find_periodic_conjugacy,
    hnn_presentation,
    is_surjective,
    make_endomorphism,
    vsa_witness_strict,
)
from .homology import (
    d_p_from_invariants,
    default_primes,
    golod_shafarevich_check,
    h1,
    h1_mod_p_rank,
)
from .presentation import Presentation, one_relator_hnn_split
from .subgroup import (
    BudgetExhausted,
    CosetTable,
    Deadline,
    RewrittenPresentation,
    reidemeister_schreier,
    subgroups_of_index,
)

CYCLIC = "cyclic"
SOLUBLE_BS = "soluble-BS(1,n)"
VSA = "VSA-witnessed"
H2B = "H2b-infinite-by-theorem"
GBS_EXCEPTION = "GBS-exception"
KERNEL = "conjectural-kernel-branch"
INCONCLUSIVE = "inconclusive"
LABELS = (CYCLIC, SOLUBLE_BS, VSA, H2B, GBS_EXCEPTION, KERNEL, INCONCLUSIVE)

# citation tags
CITE_BS1N = "soluble-BS(1,n)-boundedly-generated"
CITE_PROPER_HNN = "hnn-with-proper-edge-groups-has-infinite-H2b"
CITE_FBYZ = "free-by-cyclic-cover-has-rank-r+1"
CITE_PERIODIC = "periodic-class-gives-primitive-w-and-vsa"
CITE_DEF2 = "deficiency-at-least-two-has-vsa"
CITE_GS = "golod-shafarevich-violation-not-p-adic-analytic"
CITE_GBS_AH = "gbs-never-acylindrically-hyperbolic"
CITE_GBS_H2B = "reduced-gbs-not-small-has-infinite-H2b"
CITE_CIRCLE = "coprime-gbs-circle-is-quotient-of-BS(R,L)-without-vsa"
CITE_MAGNUS = "one-relator-magnus-splitting"


@dataclass
class Budgets:
    max_index: int = 12
    primes: tuple | None = None
    periodic_max_i: int = 4
    periodic_max_len: int = 10
    # the label of a coprime circle does not depend on this scan; it is a consistency check
    gbs_check_index: int = 8
    budget_ms: int | None = 60000

    def to_dict(self):
        d = asdict(self)
        d["primes"] = list(self.primes) if self.primes else None
        return d


# ---------------------------------------------------------------------------
# VSA witnesses

@dataclass
class VsaWitness:
    subgroup: CosetTable
    prime: int
    rank: int
    rewritten: RewrittenPresentation
    cyclic_degree: int | None = None  # set by the free-by-cyclic construction

    @property
    def presentation(self) -> Presentation:
        return self.subgroup.presentation

    def verify(self) -> bool:
        """Recompute the rank from the stored table alone."""
        if not self.subgroup.is_valid():
            return False
        rs = reidemeister_schreier(self.presentation, self.subgroup)
        rank = h1_mod_p_rank(rs.presentation, self.prime)
        return rank == self.rank and rank >= 3

    def to_dict(self):
        out = {
            "presentation": str(self.presentation),
            "index": self.subgroup.index,
            "prime": self.prime,
            "rank": self.rank,
            "subgroup": self.subgroup.to_json(),
            "subgroup_presentation": str(self.rewritten.presentation),
        }
        if self.cyclic_degree is not None:
            out["cyclic_degree"] = self.cyclic_degree
        if self.presentation.deficiency >= 1 and self.rewritten.presentation.deficiency >= 1:
            out["gs_violated"] = golod_shafarevich_check(self.rewritten.presentation, self.prime).violated
        return out


@dataclass
class VsaScan:
    witness: VsaWitness | None
    searched_index: int
    subgroups_checked: int
    max_rank: int
    budget_exhausted: bool = False

    def to_dict(self):
        return {
            "found": self.witness is not None,
            "witness": self.witness.to_dict() if self.witness else None,
            "searched_index": self.searched_index,
            "subgroups_checked": self.subgroups_checked,
            "max_rank": self.max_rank,
            "budget_exhausted": self.budget_exhausted,
        }


def vsa_scan(p: Presentation, max_index: int = 12, primes=None, budget_ms=None) -> VsaScan:
    """Search subgroups in canonical order for dim H_1(H; F_p) >= 3."""
    if p.deficiency < 1:
        raise PreconditionError("virtually sufficient homology needs deficiency >= 1")
    deadline = Deadline(budget_ms)
    checked = max_rank = searched = 0
    try:
        for n in range(1, max_index + 1):
            for t in subgroups_of_index(p, n, deadline=deadline):
                deadline.check()
                checked += 1
                rs = reidemeister_schreier(p, t)
                inv = h1(rs.presentation)
                plist = sorted(primes) if primes else default_primes(inv.torsion)
                ranks = [(d_p_from_invariants(inv, q), q) for q in plist]
                best = max(r for r, _ in ranks)
                max_rank = max(max_rank, best)
                hit = next((q for r, q in ranks if r >= 3), None)
                if hit is not None:
                    rank = h1_mod_p_rank(rs.presentation, hit)
                    assert rank == d_p_from_invariants(inv, hit)
                    return VsaScan(VsaWitness(t, hit, rank, rs), n, checked, max_rank)
            searched = n
    except BudgetExhausted:
        return VsaScan(None, searched, checked, max_rank, True)
    return VsaScan(None, searched, checked, max_rank)


def vsa_search(p: Presentation, max_index: int = 12, primes=None, budget_ms=None) -> VsaWitness | None:
    return vsa_scan(p, max_index, primes, budget_ms).witness


def abelianized_matrix(alpha) -> list[list[int]]:
    """Column j holds the exponent sums of alpha(x_j)."""
    r = alpha.rank
    return [[alpha.images[j].exponent_sum(i) for j in range(r)] for i in range(r)]


def matrix_order_mod_p(m, prime: int) -> int:
    r = len(m)
    ident = [[int(i == j) for j in range(r)] for i in range(r)]
    base = [[x % prime for x in row] for row in m]
    cur = base
    for k in range(1, prime ** (r * r) + 1):
        if cur == ident:
            return k
        cur = [[sum(cur[i][l] * base[l][j] for l in range(r)) % prime for j in range(r)] for i in range(r)]
    raise ValueError("matrix is not invertible mod p")


def fbyz_witness(alpha, prime: int) -> VsaWitness:
    """Witness at the cyclic cover <t^d, F_r> where d is the order of alpha mod p."""
    r = alpha.rank
    if r < 2:
        raise PreconditionError("free-by-cyclic witness needs rank >= 2")
    if not is_surjective(alpha):
        raise PreconditionError("map is not an automorphism")
    d = matrix_order_mod_p(abelianized_matrix(alpha), prime)
    pres = hnn_presentation(alpha)
    # t (generator 0) cycles the cosets; the free basis fixes every coset
    perms = [[(c + 1) % d for c in range(d)]] + [list(range(d)) for _ in range(r)]
    table = CosetTable.from_permutations(pres, perms)
    rs = reidemeister_schreier(pres, table)
    rank = h1_mod_p_rank(rs.presentation, prime)
    if rank != r + 1:
        raise TheoremViolation(f"cover has mod-{prime} rank {rank}, expected {r + 1}")
    return VsaWitness(table, prime, rank, rs, cyclic_degree=d)


# ---------------------------------------------------------------------------
# syntactic recognition

def _runs(v):
    """Split a word over {1, 2} into (stable sign, m, k) for T^e A^m T^-e A^k, else None."""
    L = v.letters
    if not L or abs(L[0]) != 1:
        return None
    e = L[0]
    i = 1
    m = 0
    while i < len(L) and abs(L[i]) == 2:
        m += 1 if L[i] > 0 else -1
        i += 1
    if m == 0 or i >= len(L) or L[i] != -e:
        return None
    i += 1
    k = 0
    while i < len(L) and abs(L[i]) == 2:
        k += 1 if L[i] > 0 else -1
        i += 1
    if i != len(L) or k == 0:
        return None
    return e, m, k


def recognize_bs(p: Presentation):
    """``(m, n, stable_index)`` if the single relator reads t a^m t^-1 = a^n, else None."""
    if p.num_generators != 2 or len(p.relators) != 1:
        return None
    r = p.relators[0]
    for t in (0, 1):
        images = [None, None]
        images[t], images[1 - t] = Word((1,)), Word((2,))
        w = substitute(r, images)
        for v in [w, ~w]:
            L = v.letters
            for s in range(len(L)):
                hit = _runs(Word(L[s:] + L[:s]))
                if hit:
                    e, m, k = hit
                    # t^e a^m t^-e a^k = 1
                    return (m, -k, t) if e == 1 else (-k, m, t)
    return None


def _two_gen_key(w: Word) -> tuple:
    """Canonical key up to rotation, inversion and signed permutations of two generators."""
    keys = []
    for swap in (False, True):
        for s0 in (1, -1):
            for s1 in (1, -1):
                imgs = [Word((s0,)), Word((2 * s1,))]
                if swap:
                    imgs = imgs[::-1]
                keys.append(cyclic_canonical(substitute(w, imgs)))
    return min(keys)


@lru_cache(maxsize=None)
def _circle_reductions(bound: int = 6) -> tuple:
    """(relator, circle) for every coprime two-edge circle with labels 2 <= |l|, |r| <= bound."""
    labels = [x for k in range(2, bound + 1) for x in (k, -k)]
    out = []
    for l1 in labels:
        for r1 in labels:
            for l2 in labels:
                for r2 in labels:
                    c = CircleData(((l1, r1), (l2, r2)))
                    if c.coprime:
                        out.append((two_generator_reduction(c).presentation.relators[0], c))
    return tuple(out)


def circle_fingerprint(p: Presentation, bound: int = 6) -> CircleData | None:
    """Match a 2-generator relator against reductions of small coprime two-edge circles."""
    if p.num_generators != 2 or len(p.relators) != 1:
        return None
    r = p.relators[0]
    key = _two_gen_key(r)
    for rel, c in _circle_reductions(bound):
        if len(rel) == len(r) and _two_gen_key(rel) == key:
            return c
    return None


# ---------------------------------------------------------------------------
# verdicts

@dataclass
class Verdict:
    label: str
    certificates: list = field(default_factory=list)
    citations: list = field(default_factory=list)
    budgets: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    witness: VsaWitness | None = None

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}")

    def to_dict(self):
        return {
            "label": self.label,
            "certificates": self.certificates,
            "citations": self.citations,
            "budgets": self.budgets,
            "timings": {k: round(v, 4) for k, v in self.timings.items()},
        }


class _Clock:
    def __init__(self, budget_ms):
        self.start = time.monotonic()
        self.budget_ms = budget_ms
        self.timings = {}
        self._mark = self.start

    def remaining(self):
        if self.budget_ms is None:
            return None
        return max(1, self.budget_ms - int(1000 * (time.monotonic() - self.start)))

    def lap(self, name):
        now = time.monotonic()
        self.timings[name] = self.timings.get(name, 0.0) + now - self._mark
        self._mark = now


def _vsa_verdict(w: VsaWitness, extra_cert=None, citations=()):
    certs = [{"type": "vsa", **w.to_dict()}]
    if extra_cert:
        certs.insert(0, extra_cert)
    return VSA, certs, list(citations) + [CITE_GS], w


def _split_cert(split):
    cert = {
        "type": "magnus-splitting",
        "kind": split.kind,
        "change_of_basis": split.change_of_basis,
        "presentation": str(split.presentation),
        "stable": split.presentation.generators[split.stable],
    }
    if split.endomorphism is not None:
        cert["vertex_rank"] = split.vertex_rank
        cert["endomorphism"] = [repr(w) for w in split.endomorphism]
        cert["stable_sign"] = split.endomorphism_stable_sign
    return cert


def _deficiency_one(p: Presentation, b: Budgets, clock: _Clock):
    """Return (label, certificates, citations, witness)."""
    if p.num_generators == 1:
        return CYCLIC, [{"type": "generators", "count": 1, "relators": 0}], [], None

    if p.num_generators == 2 and len(p.relators) == 1:
        bs = recognize_bs(p)
        clock.lap("recognize")
        if bs and (abs(bs[0]) == 1 or abs(bs[1]) == 1):
            n = bs[0] * bs[1]
            cert = {"type": "syntactic-BS", "m": bs[0], "n": bs[1], "soluble_n": n,
                    "stable": p.generators[bs[2]]}
            return SOLUBLE_BS, [cert], [CITE_BS1N], None

        split = one_relator_hnn_split(p)
        clock.lap("split")
        cert = _split_cert(split)
        if split.kind == "both-proper":
            core = split.vertex_relator
            if split.lo == split.hi and len(core) == 1:
                return CYCLIC, [cert], [CITE_MAGNUS], None
            scan = vsa_scan(p, b.max_index, b.primes, clock.remaining())
            clock.lap("vsa")
            if scan.witness:
                return _vsa_verdict(scan.witness, cert, [CITE_MAGNUS])
            cert["vsa_scan"] = scan.to_dict()
            return H2B, [cert], [CITE_MAGNUS, CITE_PROPER_HNN], None

        if split.kind in ("ascending-equal", "ascending-strict"):
            r = split.vertex_rank
            if r == 1:
                (img,) = split.endomorphism
                n = img.exponent_sum(0)
                cert["soluble_n"] = n
                return SOLUBLE_BS, [cert], [CITE_MAGNUS, CITE_BS1N], None
            theta = make_endomorphism(split.endomorphism)
            if split.kind == "ascending-equal":
                prime = min(b.primes) if b.primes else 2
                w = fbyz_witness(theta, prime)
                clock.lap("fbyz")
                return _vsa_verdict(w, cert, [CITE_MAGNUS, CITE_FBYZ])
            wit = find_periodic_conjugacy(theta, b.periodic_max_i, b.periodic_max_len)
            clock.lap("periodic")
            if wit is not None:
                cert["periodic"] = wit.to_dict(theta.alphabet)
                rep = vsa_witness_strict(theta, wit, budget_ms=clock.remaining())
                clock.lap("vsa-strict")
                if rep.found:
                    w = VsaWitness(rep.cover, rep.prime, rep.rank, rep.rewritten)
                    cert["primitivity"] = rep.certificate.to_dict(theta.alphabet)
                    return _vsa_verdict(w, cert, [CITE_MAGNUS, CITE_PERIODIC])
            scan = vsa_scan(p, b.max_index, b.primes, clock.remaining())
            clock.lap("vsa")
            if scan.witness:
                return _vsa_verdict(scan.witness, cert, [CITE_MAGNUS])
            cert["vsa_scan"] = scan.to_dict()
            return INCONCLUSIVE, [cert], [], None

    scan = vsa_scan(p, b.max_index, b.primes, clock.remaining())
    clock.lap("vsa")
    if scan.witness:
        return _vsa_verdict(scan.witness)
    return INCONCLUSIVE, [{"type": "vsa-scan", **scan.to_dict()}], [], None


def classify_deficiency_one(p: Presentation, budgets: Budgets | None = None) -> Verdict:
    if p.deficiency != 1:
        raise PreconditionError(f"deficiency is {p.deficiency}, expected 1")
    b = budgets or Budgets()
    clock = _Clock(b.budget_ms)
    label, certs, cites, w = _deficiency_one(p, b, clock)
    return Verdict(label, certs, cites, b.to_dict(), clock.timings, w)


def _gbs_circle(p: Presentation):
    bs = recognize_bs(p)
    if bs:
        m, n, _ = bs
        if abs(m) >= 2 and abs(n) >= 2 and gcd(m, n) == 1:
            # t a^m t^-1 = a^n is the loop a^n = t a^m t^-1
            return CircleData(((n, m),)), "syntactic-BS"
        return None
    c = circle_fingerprint(p)
    return (c, "two-edge-circle-fingerprint") if c else None


def classify_one_relator(p: Presentation, budgets: Budgets | None = None) -> Verdict:
    if len(p.relators) != 1:
        raise PreconditionError("expected exactly one relator")
    b = budgets or Budgets()
    clock = _Clock(b.budget_ms)
    if p.num_generators == 1:
        cert = {"type": "one-generator", "order": abs(p.relators[0].exponent_sum(0))}
        return Verdict(CYCLIC, [cert], [], b.to_dict(), clock.timings)
    if p.num_generators >= 3:
        scan = vsa_scan(p, b.max_index, b.primes, clock.remaining())
        clock.lap("vsa")
        if scan.witness:
            label, certs, cites, w = _vsa_verdict(scan.witness, citations=[CITE_DEF2])
            return Verdict(label, certs, cites, b.to_dict(), clock.timings, w)
        return Verdict(INCONCLUSIVE, [{"type": "vsa-scan", **scan.to_dict()}], [CITE_DEF2],
                       b.to_dict(), clock.timings)
    hit = _gbs_circle(p)
    clock.lap("gbs")
    if hit:
        circle, how = hit
        scan = vsa_scan(p, min(b.max_index, b.gbs_check_index), b.primes, clock.remaining())
        clock.lap("vsa")
        if scan.witness:
            raise TheoremViolation("coprime GBS circle has a VSA witness")
        certs = [
            {"type": "gbs-circle", "recognized_by": how, **circle.to_dict()},
            {"type": "quotient-relation", **quotient_relation(circle).to_dict()},
            {"type": "vsa-scan", **scan.to_dict()},
        ]
        cites = [CITE_GBS_AH, CITE_GBS_H2B, CITE_CIRCLE]
        return Verdict(GBS_EXCEPTION, certs, cites, b.to_dict(), clock.timings)
    label, certs, cites, w = _deficiency_one(p, b, clock)
    return Verdict(label, certs, cites, b.to_dict(), clock.timings, w)


def bounded_generation_verdict(v: Verdict) -> dict:
    if v.label in (CYCLIC, SOLUBLE_BS):
        return {"bounded_generation": "boundedly generated", "reason": v.label}
    if v.label == VSA:
        return {"bounded_generation": "NOT boundedly generated",
                "phenomenon": "finite-index subgroup with non-p-adic-analytic pro-p completion"}
    if v.label in (H2B, GBS_EXCEPTION):
        return {"bounded_generation": "NOT boundedly generated",
                "phenomenon": "infinite-dimensional second bounded cohomology"}
    return {"bounded_generation": "unknown", "reason": v.label}


def classify_presentation(p: Presentation, budgets: Budgets | None = None) -> Verdict:
    """Dispatch on the shape of the presentation."""
    if len(p.relators) == 1:
        return classify_one_relator(p, budgets)
    if p.deficiency == 1:
        return classify_deficiency_one(p, budgets)
    if p.deficiency < 1:
        raise PreconditionError(f"deficiency is {p.deficiency}, expected at least 1")
    b = budgets or Budgets()
    clock = _Clock(b.budget_ms)
    scan = vsa_scan(p, b.max_index, b.primes, clock.remaining())
    clock.lap("vsa")
    if scan.witness:
        label, certs, cites, w = _vsa_verdict(scan.witness, citations=[CITE_DEF2])
        return Verdict(label, certs, cites, b.to_dict(), clock.timings, w)
    return Verdict(INCONCLUSIVE, [{"type": "vsa-scan", **scan.to_dict()}], [CITE_DEF2],
                   b.to_dict(), clock.timings)
