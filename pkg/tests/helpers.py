"""Random instance generators and brute-force oracles shared by the tests."""

import itertools
import random

from rankone.freegroup import Word, compose, identity_map, substitute
from rankone.presentation import Presentation
from rankone.freegroup import Alphabet


def random_word(rng: random.Random, rank: int, length: int) -> Word:
    letters = []
    while len(letters) < length:
        x = rng.choice([s * i for i in range(1, rank + 1) for s in (1, -1)])
        if letters and letters[-1] == -x:
            continue
        letters.append(x)
    return Word(tuple(letters))


def nielsen_move(rng: random.Random, rank: int):
    """One elementary Nielsen automorphism and its inverse, as image lists."""
    i = rng.randrange(rank)
    kind = rng.choice(["mul", "inv", "swap"] if rank > 1 else ["inv"])
    f, g = identity_map(rank), identity_map(rank)
    if kind == "inv":
        f[i] = g[i] = Word.gen(i, -1)
    elif kind == "swap":
        j = rng.choice([k for k in range(rank) if k != i])
        f[i], f[j] = Word.gen(j), Word.gen(i)
        g = list(f)
    else:
        j = rng.choice([k for k in range(rank) if k != i])
        e = rng.choice([1, -1])
        if rng.random() < 0.5:
            f[i] = Word.gen(i) * Word.gen(j, e)
            g[i] = Word.gen(i) * Word.gen(j, -e)
        else:
            f[i] = Word.gen(j, e) * Word.gen(i)
            g[i] = Word.gen(j, -e) * Word.gen(i)
    return f, g


def random_automorphism(rng: random.Random, rank: int, moves: int = 5):
    """Return ``(alpha, alpha_inv)`` as image lists; a product of Nielsen moves."""
    a, b = identity_map(rank), identity_map(rank)
    for _ in range(moves):
        f, g = nielsen_move(rng, rank)
        a = compose(a, f)
        b = compose(g, b)
    assert compose(a, b) == identity_map(rank)
    return a, b


def apply(images, w: Word) -> Word:
    return substitute(w, images)


def random_permutation_action(rng: random.Random, rank: int, n: int):
    """Random transitive action of a free group of the given rank on n points."""
    while True:
        perms = [rng.sample(range(n), n) for _ in range(rank)]
        seen, stack = {0}, [0]
        while stack:
            c = stack.pop()
            for p in perms:
                inv = p.index(c)
                for d in (p[c], inv):
                    if d not in seen:
                        seen.add(d)
                        stack.append(d)
        if len(seen) == n:
            return perms


def free_presentation(rank: int) -> Presentation:
    return Presentation(Alphabet(tuple("abcdefgh"[:rank])), ())


def products_up_to(basis, k: int) -> set:
    """All reduced products of at most k basis elements and their inverses."""
    symbols = list(basis) + [~b for b in basis]
    out = {Word()}
    for n in range(1, k + 1):
        for combo in itertools.product(symbols, repeat=n):
            w = Word()
            for s in combo:
                w = w * s
            out.add(w)
    return out


def permutation_word_image(perms, w: Word, start: int = 0) -> int:
    c = start
    for x in w.letters:
        p = perms[abs(x) - 1]
        c = p[c] if x > 0 else p.index(c)
    return c
