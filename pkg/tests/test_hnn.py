import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import apply, random_automorphism, random_word
from rankone.freegroup import Alphabet, Word, contains, cyclic_canonical, fold, root
from rankone.hnn import (
    EndoSyntaxError,
    LemmaPreconditionError,
    NotInjective,
    PeriodicWitness,
    PreconditionError,
    conjugacy_candidates,
    cyclic_cover,
    find_periodic_conjugacy,
    hnn_presentation,
    is_surjective,
    lemma_prim_check,
    make_endomorphism,
    normalize,
    parse_endomorphism,
    prove_primitive,
    vsa_witness_strict,
)
from rankone.homology import h1, h1_mod_p_rank

AB = Alphabet(("a", "b"))


def endo(text):
    return parse_endomorphism(text)


def W(s):
    return AB.parse(s)


def test_parse_and_format_round_trip():
    th = endo("# comment\na -> a^2 b\nb -> b a\n")
    assert th.format().strip().splitlines() == ["a -> a^2 b", "b -> b a"]
    assert parse_endomorphism(th.format()).images == th.images


@pytest.mark.parametrize("text", ["a a^2\n", "", "a -> c\n"])
def test_parse_errors(text):
    with pytest.raises(EndoSyntaxError):
        parse_endomorphism(text)


def test_non_injective_rejected():
    with pytest.raises(NotInjective):
        make_endomorphism([W("a^2"), W("a^3")])
    with pytest.raises(NotInjective):
        make_endomorphism([W("a b"), W("a b")])


def test_hnn_presentation_shapes():
    ds = hnn_presentation(endo("a -> a^3\nb -> b^3\n"))
    assert str(ds) == "< t, a, b | t a t^-1 a^-3, t b t^-1 b^-3 >"
    c = hnn_presentation(endo("a -> b\nb -> a^3\n"))
    assert str(c) == "< t, a, b | t a t^-1 b^-1, t b t^-1 a^-3 >"
    assert ds.deficiency == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_hnn_presentation_has_positive_d_p(seed):
    rng = random.Random(seed)
    imgs = [random_word(rng, 2, rng.randint(1, 4)) for _ in range(2)]
    try:
        th = make_endomorphism(imgs)
    except NotInjective:
        return
    p = hnn_presentation(th)
    assert p.deficiency == 1
    for q in (2, 3, 5):
        assert h1_mod_p_rank(p, q) >= 1


def test_surjectivity():
    assert is_surjective(endo("a -> b\nb -> a b\n"))
    assert not is_surjective(endo("a -> a^2\nb -> b\n"))


def test_cyclic_cover_of_c2d_is_ds2d():
    c = endo("a -> b\nb -> a^3\n")
    assert cyclic_cover(c, 2).images == endo("a -> a^3\nb -> b^3\n").images


def test_conjugacy_candidates_match_brute_force():
    brute = set()
    for n in range(1, 6):
        for letters in product([1, -1, 2, -2], repeat=n):
            w = Word(letters)
            if len(w) == n and (n == 1 or letters[0] != -letters[-1]):
                if root(w)[1] == 1:
                    brute.add(cyclic_canonical(w))
    got = {cyclic_canonical(w) for w in conjugacy_candidates(2, 5)}
    assert got == brute


def test_periodic_witness_examples():
    th = endo("a -> b a^2 b^-1\nb -> b^2\n")
    wit = find_periodic_conjugacy(th)
    assert wit is not None and wit.verify(th)
    assert abs(wit.d) >= 2


def test_fibonacci_has_no_periodic_class_with_big_exponent():
    fib = endo("a -> b\nb -> a b\n")
    assert find_periodic_conjugacy(fib, 6, 8) is None
    # the commutator is sent to a conjugate of its inverse
    wit = find_periodic_conjugacy(fib, 6, 8, min_abs_d=1)
    assert wit is not None and abs(wit.d) == 1


def test_normalize():
    th = endo("a -> b a^2 b^-1\nb -> b\n")
    np_ = normalize(th, PeriodicWitness(W("a"), W("b"), 2, 1))
    assert np_.theta_prime(W("a")) == W("a^2")


def test_lemma_examples():
    assert lemma_prim_check(fold([W("a^2"), W("b")], 2), W("a"), 2)
    H = fold([W("a^3"), W("b"), W("a b a^-1")], 2)
    assert lemma_prim_check(H, W("a"), 3)
    with pytest.raises(LemmaPreconditionError):
        lemma_prim_check(H, W("a^2 b^2"), 1)
    with pytest.raises(LemmaPreconditionError):
        lemma_prim_check(H, W("a"), 6)  # a^3 already lies in H


def test_prove_primitive_small():
    th = endo("a -> a^2\nb -> b^3\n")
    cert = prove_primitive(normalize(th, PeriodicWitness(W("a"), Word(), 2, 1)))
    assert cert.ranks == [2]
    th = endo("a -> a^-2\nb -> b\n")
    cert = prove_primitive(normalize(th, PeriodicWitness(W("a"), Word(), -2, 1)))
    assert cert.terminal_trace.replay()


def test_prove_primitive_rejects_bad_input():
    th = endo("a -> a^2\nb -> b\n")
    with pytest.raises(PreconditionError):
        prove_primitive(normalize(th, PeriodicWitness(W("b"), Word(), 1, 1)))


def planted(rng, rank, d):
    alpha, alpha_inv = random_automorphism(rng, rank, 5)
    theta0 = [Word.gen(0, d)] + [Word.gen(i) for i in range(1, rank)]
    images = [apply(alpha, apply(theta0, apply(alpha_inv, Word.gen(i)))) for i in range(rank)]
    return make_endomorphism(images), alpha[0]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 100_000), st.integers(2, 3), st.sampled_from([2, 3, 4, -2, -3]))
def test_prove_primitive_planted(seed, rank, d):
    th, w = planted(random.Random(seed), rank, d)
    cert = prove_primitive(normalize(th, PeriodicWitness(w, Word(), d, 1)))
    assert cert.terminal_trace.replay() and cert.direct_trace.replay()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_lemma_random(seed):
    rng = random.Random(seed)
    rank = rng.choice([2, 3])
    alpha, _ = random_automorphism(rng, rank, 4)
    g = alpha[0]
    H = fold([g ** rng.randint(2, 4)] + [random_word(rng, rank, rng.randint(1, 5)) for _ in range(2)], rank)
    k = next(j for j in range(1, 5) if contains(H, g ** j))
    assert lemma_prim_check(H, g, k)


@pytest.mark.parametrize("text,p", [
    ("a -> a^2\nb -> b\n", 3),
    ("a -> a^3\nb -> a b^2 a\n", 2),
    ("a -> b a^2 b^-1\nb -> b^2\n", 3),
])
def test_vsa_witness_strict(text, p):
    th = endo(text)
    rep = vsa_witness_strict(th, find_periodic_conjugacy(th))
    assert rep.found
    assert rep.prime == p
    assert rep.rank >= 3
    assert rep.gs.violated
    # independent recount of the rank from the SNF of the rewritten presentation
    inv = h1(rep.rewritten.presentation)
    assert inv.betti + sum(1 for t in inv.torsion if t % p == 0) == rep.rank


def test_vsa_witness_strict_requires_rank_two():
    th = endo("a -> a^2\n")
    with pytest.raises(PreconditionError):
        vsa_witness_strict(th, PeriodicWitness(W("a"), Word(), 2, 1))
