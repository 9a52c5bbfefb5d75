"""First homology of finitely presented groups.

Exact integer Smith normal form with unimodular transforms, ranks over F_p,
and the Golod-Shafarevich test for deficiency >= 1 presentations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from sympy import isprime, primefactors, primerange

from .presentation import Presentation


def relation_matrix(p: Presentation) -> list[list[int]]:
    """Exponent-sum matrix: one row per relator, one column per generator."""
    n = p.num_generators
    return [[r.exponent_sum(k) for k in range(n)] for r in p.relators]


def identity_matrix(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A, B):
    if not A:
        return []
    m = len(B[0]) if B else 0
    return [[sum(a * B[k][j] for k, a in enumerate(row)) for j in range(m)] for row in A]


def determinant(M) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(M)
    if n == 0:
        return 1
    A = [row[:] for row in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def smith_normal_form(m):
    """Return ``(D, U, V)`` with ``U m V = D`` in Smith form.

    ``U`` and ``V`` are unimodular; the diagonal of ``D`` is nonnegative and
    each entry divides the next.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    A = [list(map(int, r)) for r in m]
    U = identity_matrix(rows)
    V = identity_matrix(cols)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (A, V):
            for r in M:
                r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row dst += q * row src
        for M in (A, U):
            M[dst] = [x + q * y for x, y in zip(M[dst], M[src])]

    def add_col(dst, src, q):  # col dst += q * col src
        for M in (A, V):
            for r in M:
                r[dst] += q * r[src]

    def neg_row(i):
        A[i] = [-x for x in A[i]]
        U[i] = [-x for x in U[i]]

    for t in range(min(rows, cols)):
        while True:
            # pivot of minimal absolute value in the trailing block
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return A, U, V
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = A[t][t]
            clean = True
            for i in range(t + 1, rows):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    clean = clean and A[i][t] == 0
            for j in range(t + 1, cols):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    clean = clean and A[t][j] == 0
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, rows) for j in range(t + 1, cols) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            neg_row(t)
    return A, U, V


def snf_diagonal(m) -> list[int]:
    D, _, _ = smith_normal_form(m)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0))]


@dataclass(frozen=True)
class AbelianInvariants:
    betti: int
    torsion: tuple = ()

    def __str__(self):
        parts = ["Z"] * self.betti + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def invariants_from_matrix(m, ncols: int) -> AbelianInvariants:
    diag = snf_diagonal(m) if m else []
    nonzero = [d for d in diag if d]
    torsion = tuple(d for d in nonzero if d > 1)
    return AbelianInvariants(ncols - len(nonzero), torsion)


def h1(p: Presentation) -> AbelianInvariants:
    return invariants_from_matrix(relation_matrix(p), p.num_generators)


def rank_mod_p(m, prime: int) -> int:
    """Rank of an integer matrix over F_p by Gaussian elimination."""
    A = [[x % prime for x in row] for row in m]
    rank = 0
    cols = len(A[0]) if A else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(A)) if A[r][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][c], -1, prime)
        A[rank] = [x * inv % prime for x in A[rank]]
        for r in range(len(A)):
            if r != rank and A[r][c]:
                f = A[r][c]
                A[r] = [(x - f * y) % prime for x, y in zip(A[r], A[rank])]
        rank += 1
    return rank


def _check_prime(prime):
    if not isinstance(prime, int) or not isprime(prime):
        raise ValueError(f"{prime!r} is not prime")


def h1_mod_p_rank(p: Presentation, prime: int) -> int:
    _check_prime(prime)
    return p.num_generators - rank_mod_p(relation_matrix(p), prime)


def d_p_from_invariants(inv: AbelianInvariants, prime: int) -> int:
    return inv.betti + sum(1 for d in inv.torsion if d % prime == 0)


@dataclass(frozen=True)
class GolodShafarevichReport:
    p: int
    d_p: int
    deficiency: int
    relator_count_pro_p: int
    violated: bool

    def to_dict(self):
        return {"p": self.p, "d_p": self.d_p, "gs_violated": self.violated}


def golod_shafarevich_from_rank(d_p: int, deficiency: int, prime: int) -> GolodShafarevichReport:
    if deficiency < 1:
        raise ValueError("the Golod-Shafarevich test needs deficiency >= 1")
    relators = d_p - deficiency
    violated = Fraction(d_p * d_p, 4) > relators
    return GolodShafarevichReport(prime, d_p, deficiency, relators, violated)


def golod_shafarevich_check(p: Presentation, prime: int) -> GolodShafarevichReport:
    if p.deficiency < 1:
        raise ValueError("the Golod-Shafarevich test needs deficiency >= 1")
    return golod_shafarevich_from_rank(h1_mod_p_rank(p, prime), p.deficiency, prime)


def default_primes(torsion=(), bound: int = 97) -> list[int]:
    primes = set(primerange(2, bound + 1))
    for d in torsion:
        primes.update(primefactors(d))
    return sorted(primes)


def homology_report(p: Presentation, primes=None) -> dict:
    inv = h1(p)
    primes = primes if primes is not None else default_primes(inv.torsion)
    rows = []
    for q in primes:
        d = h1_mod_p_rank(p, q)
        row = {"p": q, "d_p": d}
        if p.deficiency >= 1:
            row["gs_violated"] = golod_shafarevich_from_rank(d, p.deficiency, q).violated
        else:
            row["gs_violated"] = None
        rows.append(row)
    return {"betti": inv.betti, "torsion": list(inv.torsion), "per_prime": rows}
