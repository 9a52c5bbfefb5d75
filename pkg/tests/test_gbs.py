import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankone.freegroup import cyclic_canonical
from rankone.gbs import (
    H2B_INFINITE,
    SMALL_BS,
    SMALL_KLEIN,
    SMALL_Z,
    TA,
    CircleData,
    GbsSyntaxError,
    NotCoprime,
    circle_criterion,
    circle_presentation,
    classify_gbs,
    collapse,
    parse_gbs,
    quotient_relation,
    reduce_gbs,
    two_generator_reduction,
)
from rankone.homology import h1

CIRCLE = "edge 1 2 2 3\nedge 2 1 2 3\n"


def test_parse_and_format():
    g = parse_gbs("# comment\nvertex x\n")
    assert g.vertices == ("x",) and not g.edges
    g = parse_gbs(CIRCLE)
    assert parse_gbs(g.format()).edges == g.edges


@pytest.mark.parametrize("text", ["edge 1 2 0 3\n", "edge 1 2 3\n", "edge 1 1 2 3\nvertex 7\n", "node 1\n"])
def test_parse_errors(text):
    with pytest.raises(GbsSyntaxError):
        parse_gbs(text)


def test_collapse_and_reduce():
    g = parse_gbs("edge 1 2 1 4\nedge 2 1 2 3\n")
    red, trace = reduce_gbs(g)
    assert [(e.l, e.r) for e in red.edges] == [(2, 12)]
    assert red.edges[0].is_loop and trace
    assert reduce_gbs(parse_gbs("edge 1 2 2 3\n"))[0].edges == parse_gbs("edge 1 2 2 3\n").edges
    single = collapse(parse_gbs("edge 1 2 1 5\n"), 0)
    assert not single.edges and len(single.vertices) == 1


@pytest.mark.parametrize("text,label", [
    ("edge 1 1 1 5\n", SMALL_BS),
    ("edge 1 2 2 2\n", SMALL_KLEIN),
    ("edge 1 2 1 7\n", SMALL_Z),
    (CIRCLE, H2B_INFINITE),
    ("edge 1 2 2 3\n", H2B_INFINITE),
])
def test_classify_gbs(text, label):
    v = classify_gbs(parse_gbs(text))
    assert v.label == label
    assert v.acylindrically_hyperbolic is False


def test_circle_criterion():
    c = circle_criterion(parse_gbs(CIRCLE))
    assert (c.n, c.Lprod, c.Rprod, c.coprime) == (2, 4, 9, True)
    c = circle_criterion(parse_gbs("edge 1 1 2 3\n"))
    assert (c.n, c.Lprod, c.Rprod, c.coprime) == (1, 2, 3, True)
    c = circle_criterion(parse_gbs("edge 1 2 2 4\nedge 2 1 3 5\n"))
    assert (c.Lprod, c.Rprod, c.coprime) == (6, 20, False)
    assert circle_criterion(parse_gbs("edge 1 2 2 3\n")) is None


def test_circle_orientation_is_canonical():
    a = circle_criterion(parse_gbs("edge 1 2 2 3\nedge 2 1 2 3\n"))
    b = circle_criterion(parse_gbs("edge 1 2 3 2\nedge 2 1 3 2\n"))  # the same circle read backwards
    assert a.labels == b.labels


def test_circle_presentation():
    p = circle_presentation(CircleData(((2, 3), (2, 3))))
    assert str(p) == "< a1, a2, t | a1^2 a2^-3, a2^2 t a1^-3 t^-1 >"


def test_quotient_relation_example():
    q = quotient_relation(CircleData(((2, 3), (2, 3))))
    assert TA.format(q.relation) == "t a^9 t^-1 a^-4"
    assert (q.R, q.L) == (9, 4)
    assert "BS(9,4)" in q.conclusion


@pytest.mark.parametrize("m,n", [(2, 3), (1, 5), (3, 4), (-2, 5)])
def test_quotient_relation_loop(m, n):
    q = quotient_relation(CircleData(((m, n),)))
    assert TA.format(q.relation) == TA.format(TA.parse(f"t a^{n} t^-1 a^{-m}"))


def test_quotient_relation_needs_coprime():
    with pytest.raises(NotCoprime):
        quotient_relation(CircleData(((2, 4), (3, 5))))


def test_two_generator_reduction_example():
    red = two_generator_reduction(CircleData(((2, 3), (2, 3))))
    target = TA.parse("a^2 t a^-3 t^-1") ** 3 * TA.parse("a^-2")
    (rel,) = red.presentation.relators
    assert cyclic_canonical(rel) == cyclic_canonical(target)
    assert red.substitutions["a2"] == TA.parse("a^2 t a^-3 t^-1")


def test_two_generator_reduction_degenerate():
    with pytest.raises(ValueError):
        two_generator_reduction(CircleData(((2, 3),)))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(2, 6), st.integers(2, 6)), min_size=2, max_size=3))
def test_two_generator_reduction_preserves_h1(labels):
    c = CircleData(tuple(labels))
    if not c.coprime:
        with pytest.raises(NotCoprime):
            two_generator_reduction(c)
        return
    red = two_generator_reduction(c)
    assert red.presentation.num_generators == 2
    assert h1(red.presentation) == h1(circle_presentation(c))
