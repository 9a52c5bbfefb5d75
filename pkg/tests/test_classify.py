import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_automorphism
from rankone.classify import (
    CYCLIC,
    GBS_EXCEPTION,
    H2B,
    LABELS,
    SOLUBLE_BS,
    VSA,
    Budgets,
    Verdict,
    bounded_generation_verdict,
    circle_fingerprint,
    classify_deficiency_one,
    classify_one_relator,
    classify_presentation,
    fbyz_witness,
    recognize_bs,
    vsa_scan,
    vsa_search,
)
from rankone.hnn import PreconditionError, make_endomorphism, parse_endomorphism
from rankone.homology import h1
from rankone.presentation import parse_presentation

P = parse_presentation
CIRCLE_RELATOR = "< t, a | a^2 t a^-3 t^-1 a^2 t a^-3 t^-1 a^2 t a^-3 t^-1 a^-2 >"


@pytest.mark.parametrize("text,expected", [
    ("< a, t | t a^2 t^-1 a^-3 >", (2, 3, 1)),
    ("< t, a | t a t^-1 a^-2 >", (1, 2, 0)),
    ("< a, t | t^-1 a^5 t a^-2 >", (2, 5, 1)),
    ("< a, b | a^2 b^-3 >", None),
])
def test_recognize_bs(text, expected):
    assert recognize_bs(P(text)) == expected


def test_vsa_search_free_group():
    w = vsa_search(P("< a, b | >"), 3)
    assert w is not None and w.subgroup.index == 2 and w.rank == 3
    assert w.verify()


def test_vsa_scan_abelian_exhausts():
    scan = vsa_scan(P("< a, b | a b a^-1 b^-1 >"), 5)
    assert scan.witness is None and scan.max_rank == 2 and scan.searched_index == 5


def test_vsa_scan_requires_deficiency_one():
    with pytest.raises(PreconditionError):
        vsa_scan(P("< a, b | a^2, b^3 >"), 3)


def test_vsa_scan_budget():
    scan = vsa_scan(P("< a, t | t a^3 t^-1 a^-4 >"), 12, budget_ms=50)
    assert scan.budget_exhausted


def test_fbyz_example():
    w = fbyz_witness(parse_endomorphism("a -> b\nb -> a b\n"), 2)
    assert (w.cyclic_degree, w.rank) == (3, 3)
    assert w.verify()


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from([2, 3]), st.sampled_from([2, 3, 5]))
def test_fbyz_rank_is_r_plus_one(seed, rank, prime):
    alpha, _ = random_automorphism(random.Random(seed), rank, 5)
    w = fbyz_witness(make_endomorphism(alpha), prime)
    assert w.rank == rank + 1
    assert w.subgroup.index == w.cyclic_degree


def test_circle_fingerprint():
    c = circle_fingerprint(P(CIRCLE_RELATOR))
    assert c is not None and c.coprime and (c.Lprod, c.Rprod) == (4, 9)
    assert circle_fingerprint(P("< a, b | a^2 b^-3 >")) is None


@pytest.mark.parametrize("text,label", [
    ("< a | a^5 >", CYCLIC),
    ("< t, a | t a t^-1 a^-2 >", SOLUBLE_BS),
    ("< a, b | a b a^-1 b^-1 >", SOLUBLE_BS),
    ("< a, b | a b a^-1 b >", SOLUBLE_BS),
    ("< a, t | t a^2 t^-1 a^-4 >", VSA),
    ("< a, b | a^2 b^-3 >", VSA),
    ("< a, t | t a^2 t^-1 a^-3 >", GBS_EXCEPTION),
    (CIRCLE_RELATOR, GBS_EXCEPTION),
])
def test_classification_table(text, label):
    v = classify_one_relator(P(text))
    assert v.label == label
    for cert in v.certificates:
        assert "type" in cert


def test_both_proper_branch():
    v = classify_one_relator(P("< t, a | t a t^-1 a t a^-1 t^-1 a^-2 >"), Budgets(max_index=6))
    assert v.label == H2B
    assert bounded_generation_verdict(v)["bounded_generation"] == "NOT boundedly generated"


def test_vsa_witness_is_reverified():
    v = classify_one_relator(P("< a, t | t a^2 t^-1 a^-4 >"))
    assert v.witness.verify()
    inv = h1(v.witness.rewritten.presentation)
    p = v.witness.prime
    assert inv.betti + sum(1 for t in inv.torsion if t % p == 0) == v.witness.rank


def test_dispatch_by_shape():
    assert classify_presentation(P("< a, b | >")).label == VSA
    assert classify_deficiency_one(P("< a | >")).label == CYCLIC
    with pytest.raises(PreconditionError):
        classify_presentation(P("< a, b | a^2, b^2 >"))
    # Z/2 * Z/2 * Z: d_2 = 3 already at index 1
    assert classify_presentation(P("< a, b, c | a^2, b^2 >")).label == VSA


def test_bounded_generation_readout():
    flags = {}
    for label in LABELS:
        flags[label] = bounded_generation_verdict(Verdict(label))["bounded_generation"]
    assert [k for k, v in flags.items() if v == "boundedly generated"] == [CYCLIC, SOLUBLE_BS]


def test_unknown_label_rejected():
    with pytest.raises(ValueError):
        Verdict("mystery")


def test_verdict_serialises():
    d = classify_one_relator(P("< a | a^5 >")).to_dict()
    assert set(d) == {"label", "certificates", "citations", "budgets", "timings"}
