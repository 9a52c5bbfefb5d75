import random
from math import prod

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankone.homology import (
    AbelianInvariants,
    d_p_from_invariants,
    default_primes,
    determinant,
    golod_shafarevich_check,
    h1,
    h1_mod_p_rank,
    homology_report,
    matmul,
    smith_normal_form,
)
from rankone.presentation import parse_presentation


def check_snf(m):
    D, U, V = smith_normal_form(m)
    assert matmul(matmul(U, m), V) == D
    assert abs(determinant(U)) == 1 and abs(determinant(V)) == 1
    diag = [D[i][i] for i in range(min(len(D), len(D[0])))]
    assert all(x >= 0 for x in diag)
    for i in range(len(D)):
        for j in range(len(D[0])):
            if i != j:
                assert D[i][j] == 0
    nz = [x for x in diag if x]
    assert diag[: len(nz)] == nz
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    return diag


def test_snf_known():
    assert check_snf([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == [2, 6, 12]
    assert check_snf([[0, 0], [0, 0]]) == [0, 0]
    assert check_snf([[6, 4]]) == [2]


matrices = st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: st.lists(st.lists(st.integers(-9, 9), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_snf_round_trip(m):
    diag = check_snf(m)
    if len(m) == len(m[0]):
        assert abs(determinant(m)) == prod(diag)


@pytest.mark.parametrize("text,betti,torsion", [
    ("< a, b | a b a^-1 b >", 1, (2,)),
    ("< t, a | t a t^-1 a^-4 >", 1, (3,)),
    ("< a, b | a b a^-1 b^-1 >", 2, ()),
    ("< a | a^5 >", 0, (5,)),
    ("< a, b | a^2, b^3 >", 0, (6,)),
    ("< a, b | >", 2, ()),
])
def test_h1(text, betti, torsion):
    assert h1(parse_presentation(text)) == AbelianInvariants(betti, torsion)


def test_d_p_agrees_with_invariants():
    rng = random.Random(3)
    for _ in range(30):
        rels = []
        for _ in range(2):
            rels.append(" ".join(f"{g}^{rng.randint(-5, 5) or 1}" for g in "abc"))
        p = parse_presentation(f"< a, b, c | {', '.join(rels)} >")
        inv = h1(p)
        for q in (2, 3, 5, 7):
            assert h1_mod_p_rank(p, q) == d_p_from_invariants(inv, q)


def test_bs14_d3_row():
    rep = homology_report(parse_presentation("< t, a | t a t^-1 a^-4 >"), [2, 3])
    rows = {r["p"]: r for r in rep["per_prime"]}
    assert rows[3]["d_p"] == 2
    assert rows[2]["d_p"] == 1


def test_golod_shafarevich():
    free3 = parse_presentation("< a, b, c | >")
    assert golod_shafarevich_check(free3, 2).violated
    bs = parse_presentation("< t, a | t a t^-1 a^-4 >")
    r = golod_shafarevich_check(bs, 3)
    assert (r.d_p, r.violated) == (2, False)
    with pytest.raises(ValueError):
        golod_shafarevich_check(parse_presentation("< a | a^2 >"), 2)


def test_prime_validation_and_defaults():
    with pytest.raises(ValueError):
        h1_mod_p_rank(parse_presentation("< a | a^2 >"), 4)
    ps = default_primes((101 * 2,))
    assert 101 in ps and 2 in ps and ps == sorted(ps)
