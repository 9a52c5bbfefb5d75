"""Finite-index subgroups of finitely presented groups.

Coset tables are stored with one column per signed letter, in the order
``x1, x1^-1, x2, x2^-1, ...``; cosets are numbered from 0 internally and from
1 in the JSON form.  Cosets are right cosets, so words act on the right.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .freegroup import Alphabet, Word
from .presentation import Presentation


class CosetEnumerationExhausted(RuntimeError):
    """Coset limit reached before the table closed; says nothing about the index."""


class BudgetExhausted(RuntimeError):
    pass


def _col(x: int) -> int:
    return 2 * (abs(x) - 1) + (x < 0)


def _letter(col: int) -> int:
    return (col // 2 + 1) * (-1 if col % 2 else 1)


def _cols(w: Word) -> list[int]:
    return [_col(x) for x in w.letters]


class Deadline:
    def __init__(self, budget_ms=None):
        self.end = None if budget_ms is None else time.monotonic() + budget_ms / 1000

    def check(self):
        if self.end is not None and time.monotonic() > self.end:
            raise BudgetExhausted("time budget exhausted")


def _standardize(table, base: int = 0):
    """Renumber a complete table by first appearance in a row-major scan from ``base``."""
    order = [base]
    number = {base: 0}
    k = 0
    while k < len(order):
        for d in table[order[k]]:
            if d not in number:
                number[d] = len(order)
                order.append(d)
        k += 1
    return tuple(tuple(number[d] for d in table[c]) for c in order)


@dataclass(frozen=True)
class CosetTable:
    presentation: Presentation
    table: tuple
    subgroup_gens: tuple = ()

    @property
    def index(self) -> int:
        return len(self.table)

    @property
    def generators(self):
        return self.presentation.generators

    def act(self, c: int, w: Word) -> int:
        for x in w.letters:
            c = self.table[c][_col(x)]
        return c

    def action(self) -> dict:
        return {
            name: [self.table[c][2 * i] for c in range(self.index)]
            for i, name in enumerate(self.generators)
        }

    def key(self):
        n = self.presentation.num_generators
        return (self.index, tuple(self.table[c][2 * i] for c in range(self.index) for i in range(n)))

    def is_valid(self) -> bool:
        n = self.presentation.num_generators
        for c in range(self.index):
            row = self.table[c]
            if len(row) != 2 * n:
                return False
            for col, d in enumerate(row):
                if not 0 <= d < self.index or self.table[d][col ^ 1] != c:
                    return False
        for r in self.presentation.relators:
            if any(self.act(c, r) != c for c in range(self.index)):
                return False
        return all(self.act(0, w) == 0 for w in self.subgroup_gens)

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "generators": list(self.generators),
            "action": {k: [c + 1 for c in v] for k, v in self.action().items()},
        }

    @classmethod
    def from_json(cls, presentation: Presentation, data: dict) -> "CosetTable":
        if list(data["generators"]) != list(presentation.generators):
            raise ValueError("generator names do not match the presentation")
        return cls.from_permutations(
            presentation, [[c - 1 for c in data["action"][g]] for g in presentation.generators]
        )

    @classmethod
    def from_permutations(cls, presentation: Presentation, perms, subgroup_gens=()) -> "CosetTable":
        """Table of the stabiliser of point 0 in a transitive permutation action."""
        n = len(perms[0]) if perms else 1
        rows = []
        for c in range(n):
            row = []
            for p in perms:
                inv = [0] * n
                for i, j in enumerate(p):
                    inv[j] = i
                row += [p[c], inv[c]]
            rows.append(row)
        std = _standardize(rows)
        if len(std) != n:
            raise ValueError("permutation action is not transitive")
        t = cls(presentation, std, tuple(subgroup_gens))
        if not t.is_valid():
            raise ValueError("permutations do not satisfy the relators")
        return t


# ---------------------------------------------------------------------------
# Todd-Coxeter (HLT)

class _Enumerator:
    def __init__(self, ncols: int, max_cosets: int, deadline: Deadline):
        self.ncols = ncols
        self.max = max_cosets
        self.table = [[None] * ncols]
        self.p = [0]
        self.deadline = deadline

    def rep(self, k):
        root = k
        while self.p[root] != root:
            root = self.p[root]
        while self.p[k] != root:
            self.p[k], k = root, self.p[k]
        return root

    def define(self, c, x):
        if len(self.table) >= self.max:
            raise CosetEnumerationExhausted(f"more than {self.max} cosets needed")
        d = len(self.table)
        self.table.append([None] * self.ncols)
        self.p.append(d)
        self.table[c][x] = d
        self.table[d][x ^ 1] = c

    def merge(self, k, l, q):
        k, l = self.rep(k), self.rep(l)
        if k == l:
            return
        if k > l:
            k, l = l, k
        self.p[l] = k
        q.append(l)

    def coincidence(self, a, b):
        q: list = []
        self.merge(a, b, q)
        i = 0
        T = self.table
        while i < len(q):
            e = q[i]
            i += 1
            for x in range(self.ncols):
                f = T[e][x]
                if f is None:
                    continue
                if T[f][x ^ 1] == e:
                    T[f][x ^ 1] = None
                e1, f1 = self.rep(e), self.rep(f)
                if T[e1][x] is not None:
                    self.merge(f1, T[e1][x], q)
                elif T[f1][x ^ 1] is not None:
                    self.merge(e1, T[f1][x ^ 1], q)
                else:
                    T[e1][x] = f1
                    T[f1][x ^ 1] = e1

    def scan_and_fill(self, c, word):
        T = self.table
        f, b = c, c
        i, j = 0, len(word) - 1
        while True:
            while i <= j and T[f][word[i]] is not None:
                f = T[f][word[i]]
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                return
            while j >= i and T[b][word[j] ^ 1] is not None:
                b = T[b][word[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                T[f][word[i]] = b
                T[b][word[i] ^ 1] = f
                return
            self.define(f, word[i])

    def run(self, relators, subgens):
        for w in subgens:
            self.scan_and_fill(0, w)
        c = 0
        while c < len(self.table):
            self.deadline.check()
            if self.p[c] == c:
                for r in relators:
                    self.scan_and_fill(c, r)
                    if self.p[c] != c:
                        break
                if self.p[c] == c:
                    for x in range(self.ncols):
                        if self.table[c][x] is None:
                            self.define(c, x)
            c += 1
        live = [c for c in range(len(self.table)) if self.p[c] == c]
        number = {c: k for k, c in enumerate(live)}
        return [[number[self.rep(d)] for d in self.table[c]] for c in live]


def coset_enumerate(p: Presentation, subgens: Sequence[Word] = (), max_cosets: int = 100000,
                    budget_ms=None) -> CosetTable:
    if max_cosets < 1:
        raise ValueError("max_cosets must be positive")
    ncols = 2 * p.num_generators
    if ncols == 0:
        return CosetTable(p, ((),), tuple(subgens))
    e = _Enumerator(ncols, max_cosets, Deadline(budget_ms))
    rows = e.run([_cols(r) for r in p.relators], [_cols(w) for w in subgens])
    t = CosetTable(p, _standardize(rows), tuple(subgens))
    assert t.is_valid()
    return t


# ---------------------------------------------------------------------------
# low-index subgroups

def _propagate(table, n, words_all, words_base):
    """Fill forced entries; return False on a contradiction."""
    changed = True
    while changed:
        changed = False
        for starts, words in ((range(n), words_all), ((0,), words_base)):
            for c in starts:
                for w in words:
                    f, i, j, b = c, 0, len(w) - 1, c
                    while i <= j and table[f][w[i]] >= 0:
                        f = table[f][w[i]]
                        i += 1
                    if i > j:
                        if f != b:
                            return False
                        continue
                    while j >= i and table[b][w[j] ^ 1] >= 0:
                        b = table[b][w[j] ^ 1]
                        j -= 1
                    if j < i:
                        return False
                    if i == j:
                        x = w[i]
                        if table[b][x ^ 1] >= 0 or table[f][x] >= 0:
                            return False
                        table[f][x] = b
                        table[b][x ^ 1] = f
                        changed = True
    return True


def _scan_deduce(table, start, w, queue):
    """Scan w from ``start``; deduce a single missing entry.  False on a clash."""
    f, i, j, b = start, 0, len(w) - 1, start
    while i <= j and table[f][w[i]] >= 0:
        f = table[f][w[i]]
        i += 1
    if i > j:
        return f == b
    while j >= i and table[b][w[j] ^ 1] >= 0:
        b = table[b][w[j] ^ 1]
        j -= 1
    if j < i:
        return False
    if i == j:
        x = w[i]
        if table[b][x ^ 1] >= 0:
            return False
        table[f][x] = b
        table[b][x ^ 1] = f
        queue.append((f, x))
    return True


def _process_deductions(table, queue, by_col, base_words):
    """Scan every relator rotation through each newly defined edge."""
    while True:
        while queue:
            c, x = queue.pop()
            d = table[c][x]
            for start, col in ((c, x), (d, x ^ 1)):
                for w in by_col[col]:
                    if not _scan_deduce(table, start, w, queue):
                        return False
        for w in base_words:
            if not _scan_deduce(table, 0, w, queue):
                return False
        if not queue:
            return True


def _rotations_by_column(rels, ncols):
    by_col = [[] for _ in range(ncols)]
    seen = set()
    for r in rels:
        inv = [x ^ 1 for x in reversed(r)]
        for w in (r, inv):
            for k in range(len(w)):
                rot = tuple(w[k:] + w[:k])
                if rot not in seen:
                    seen.add(rot)
                    by_col[rot[0]].append(rot)
    return by_col


def _closes_at(table, b, words):
    """True if every word is fully defined from coset b and returns to b."""
    for w in words:
        c = b
        for x in w:
            c = table[c][x]
            if c < 0:
                return False
        if c != b:
            return False
    return True


def _beaten_by_conjugate(table, used, ncols, base_words):
    """True if some rebased table is already smaller on the defined prefix."""
    for b in range(1, used):
        if base_words and not _closes_at(table, b, base_words):
            continue
        number = {b: 0}
        order = [b]
        k = 0
        decided = False
        while k < len(order) and not decided:
            src = order[k]
            for x in range(ncols):
                orig = table[k][x]
                img = table[src][x]
                if orig < 0 or img < 0:
                    decided = True
                    break
                if img not in number:
                    number[img] = len(order)
                    order.append(img)
                m = number[img]
                if m < orig:
                    return True
                if m > orig:
                    decided = True
                    break
            k += 1
    return False


def _tables_of_index(p: Presentation, n: int, must_contain, deadline: Deadline):
    ncols = 2 * p.num_generators
    rels = [_cols(r) for r in p.relators]
    base_words = [_cols(w) for w in must_contain if w]
    by_col = _rotations_by_column(rels, ncols)
    found = []
    if ncols == 0:
        return [((),)] if n == 1 else []

    def search(table, used):
        deadline.check()
        pos = None
        for c in range(used):
            row = table[c]
            for x in range(ncols):
                if row[x] < 0:
                    pos = (c, x)
                    break
            if pos:
                break
        if pos is None:
            if used == n:
                found.append(tuple(tuple(table[c]) for c in range(n)))
            return
        c, x = pos
        targets = [d for d in range(used) if table[d][x ^ 1] < 0]
        if used < n:
            targets.append(used)
        for d in targets:
            t2 = [row[:] for row in table]
            t2[c][x] = d
            t2[d][x ^ 1] = c
            u2 = max(used, d + 1)
            if _process_deductions(t2, [(c, x)], by_col, base_words) and not _beaten_by_conjugate(
                t2, u2, ncols, base_words
            ):
                search(t2, u2)

    table = [[-1] * ncols for _ in range(n)]
    if _propagate(table, 1, rels, base_words):
        search(table, 1)
    return found


def _class_representatives(tables, must_contain):
    out = []
    words = [w for w in must_contain if w]
    for tab in tables:
        own = tab
        keep = True
        for c in range(1, len(tab)):
            ok = True
            for w in words:
                d = c
                for col in _cols(w):
                    d = tab[d][col]
                if d != c:
                    ok = False
                    break
            if ok and _standardize(tab, c) < own:
                keep = False
                break
        if keep:
            out.append(tab)
    return out


def subgroups_of_index(p: Presentation, n: int, must_contain: Sequence[Word] = (), budget_ms=None,
                       deadline: Deadline | None = None) -> list[CosetTable]:
    """Conjugacy-class representatives of the subgroups of index exactly ``n``."""
    deadline = deadline or Deadline(budget_ms)
    tabs = _class_representatives(_tables_of_index(p, n, must_contain, deadline), must_contain)
    tables = [CosetTable(p, t) for t in tabs]
    return sorted(tables, key=CosetTable.key)


def low_index_subgroups(p: Presentation, max_index: int, must_contain: Sequence[Word] = (),
                        budget_ms=None) -> list[CosetTable]:
    """All conjugacy-class representatives of index <= max_index, in canonical order.

    With ``must_contain`` only subgroups containing every listed word are kept,
    and conjugates are compared only among those that also contain them.
    """
    if max_index < 1:
        raise ValueError("max_index must be positive")
    deadline = Deadline(budget_ms)
    out = []
    for n in range(1, max_index + 1):
        out += subgroups_of_index(p, n, must_contain, deadline=deadline)
    return out


def iter_low_index_subgroups(p: Presentation, max_index: int, must_contain=(), budget_ms=None,
                             min_index: int = 1):
    deadline = Deadline(budget_ms)
    for n in range(min_index, max_index + 1):
        yield from subgroups_of_index(p, n, must_contain, deadline=deadline)


# ---------------------------------------------------------------------------
# transversals and rewriting

@dataclass(frozen=True)
class SchreierTransversal:
    representatives: tuple
    # tree edges as (parent coset, column, child coset)
    tree: frozenset = frozenset()

    def is_prefix_closed(self) -> bool:
        reps = set(self.representatives)
        return all(Word(r.letters[:k]) in reps for r in reps for k in range(len(r) + 1))


def schreier_transversal(t: CosetTable) -> SchreierTransversal:
    reps = {0: Word()}
    tree = set()
    q = deque([0])
    ncols = 2 * t.presentation.num_generators
    while q:
        c = q.popleft()
        for x in range(ncols):
            d = t.table[c][x]
            if d not in reps:
                reps[d] = Word(reps[c].letters + (_letter(x),))
                tree.add((c, x, d))
                q.append(d)
    return SchreierTransversal(tuple(reps[c] for c in range(t.index)), frozenset(tree))


@dataclass(frozen=True)
class RewrittenPresentation:
    presentation: Presentation
    origin: dict  # new generator name -> word in the parent generators
    dropped: int
    raw_relators: tuple  # rewritten s r s^-1, before cyclic reduction
    relator_sources: tuple  # (coset, relator index) for each raw relator
    transversal: SchreierTransversal


def _schreier_generators(t: CosetTable, trans: SchreierTransversal):
    """Nontrivial pairs (coset, generator index), i.e. non-tree positive edges."""
    trivial = set()
    for c, x, d in trans.tree:
        if x % 2 == 0:
            trivial.add((c, x // 2))
        else:
            trivial.add((d, x // 2))
    pairs = []
    for c in range(t.index):
        for i in range(t.presentation.num_generators):
            if (c, i) not in trivial:
                pairs.append((c, i))
    return pairs, len(trivial)


def reidemeister_schreier(p: Presentation, t: CosetTable) -> RewrittenPresentation:
    trans = schreier_transversal(t)
    pairs, dropped = _schreier_generators(t, trans)
    number = {pair: k + 1 for k, pair in enumerate(pairs)}
    names = []
    taken = set()
    for c, i in pairs:
        name = f"{p.generators[i]}_{c}"
        if name in taken:
            name = f"y{len(names)}_{c}"
        taken.add(name)
        names.append(name)
    origin = {}
    reps = trans.representatives
    for (c, i), name in zip(pairs, names):
        x = Word.gen(i)
        d = t.table[c][2 * i]
        origin[name] = reps[c] * x * ~reps[d]
    raw = []
    sources = []
    for c in range(t.index):
        for j, r in enumerate(p.relators):
            out = []
            cur = c
            for x in r.letters:
                col = _col(x)
                nxt = t.table[cur][col]
                if x > 0:
                    k = number.get((cur, x - 1))
                    if k:
                        out.append(k)
                else:
                    k = number.get((nxt, -x - 1))
                    if k:
                        out.append(-k)
                cur = nxt
            assert cur == c
            raw.append(Word(tuple(out)))
            sources.append((c, j))
    pres = Presentation(Alphabet(tuple(names)), tuple(raw))
    return RewrittenPresentation(pres, origin, dropped, tuple(raw), tuple(sources), trans)
