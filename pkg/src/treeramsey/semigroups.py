"""Finite semigroups given by Cayley tables, and their idempotents.

Elements are the integers ``0..n-1`` and ``table[x][y]`` is ``x + y``.  The
operation is written additively throughout, without any commutativity
assumption.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .errors import NotAssociative, NotIdempotent, PreconditionFailed


def check_associativity(table: Sequence[Sequence[int]]) -> bool:
    n = len(table)
    for x in range(n):
        row = table[x]
        for y in range(n):
            xy = row[y]
            for z in range(n):
                if table[xy][z] != row[table[y][z]]:
                    return False
    return True


@dataclass(frozen=True)
class FiniteSemigroup:
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        tab = tuple(tuple(int(v) for v in row) for row in self.table)
        n = len(tab)
        if n == 0:
            raise NotAssociative("empty table")
        if any(len(row) != n or any(not 0 <= v < n for v in row) for row in tab):
            raise NotAssociative("table is not a closed square")
        if not check_associativity(tab):
            raise NotAssociative("operation is not associative")
        object.__setattr__(self, "table", tab)

    @property
    def order(self) -> int:
        return len(self.table)

    def op(self, x: int, y: int) -> int:
        return self.table[x][y]

    def elements(self) -> range:
        return range(self.order)

    def is_idempotent(self, x: int) -> bool:
        return self.table[x][x] == x

    def idempotents(self, carrier: Optional[Iterable[int]] = None) -> list[int]:
        src = self.elements() if carrier is None else sorted(carrier)
        return [x for x in src if self.table[x][x] == x]

    def sum_of(self, xs: Sequence[int]) -> int:
        it = iter(xs)
        acc = next(it)
        for x in it:
            acc = self.table[acc][x]
        return acc

    def set_op(self, A: Iterable[int], B: Iterable[int]) -> frozenset:
        return frozenset(self.table[a][b] for a in A for b in B)

    def is_subsemigroup(self, A: Iterable[int]) -> bool:
        A = frozenset(A)
        return bool(A) and all(self.table[a][b] in A for a in A for b in A)


def cyclic_group(n: int) -> FiniteSemigroup:
    return FiniteSemigroup(tuple(tuple((x + y) % n for y in range(n)) for x in range(n)))


def multiplicative_mod(n: int) -> FiniteSemigroup:
    return FiniteSemigroup(tuple(tuple((x * y) % n for y in range(n)) for x in range(n)))


def left_zero(n: int) -> FiniteSemigroup:
    return FiniteSemigroup(tuple(tuple(x for _ in range(n)) for x in range(n)))


def right_zero(n: int) -> FiniteSemigroup:
    return FiniteSemigroup(tuple(tuple(range(n)) for _ in range(n)))


def min_semilattice(n: int) -> FiniteSemigroup:
    return FiniteSemigroup(tuple(tuple(min(x, y) for y in range(n)) for x in range(n)))


def direct_product(S: FiniteSemigroup, T: FiniteSemigroup) -> FiniteSemigroup:
    m = T.order
    n = S.order * m
    return FiniteSemigroup(tuple(
        tuple(S.op(x // m, y // m) * m + T.op(x % m, y % m) for y in range(n)) for x in range(n)
    ))


def all_semigroups(order: int) -> Iterator[FiniteSemigroup]:
    """Every associative Cayley table on ``order`` labelled elements."""
    n = order
    cells = n * n
    for flat in itertools.product(range(n), repeat=cells):
        tab = tuple(flat[i * n:(i + 1) * n] for i in range(n))
        if check_associativity(tab):
            yield FiniteSemigroup(tab)


def subsemigroups(S: FiniteSemigroup) -> list[frozenset]:
    out = []
    for mask in range(1, 1 << S.order):
        A = frozenset(x for x in S.elements() if mask >> x & 1)
        if S.is_subsemigroup(A):
            out.append(A)
    return out


def ideals(S: FiniteSemigroup) -> list[frozenset]:
    out = []
    for mask in range(1, 1 << S.order):
        A = frozenset(x for x in S.elements() if mask >> x & 1)
        if all(S.op(a, s) in A and S.op(s, a) in A for a in A for s in S.elements()):
            out.append(A)
    return out


def idempotent_power(S: FiniteSemigroup, x: int) -> int:
    """The idempotent among the powers of ``x``.

    Doubling ``y -> y + y`` must revisit a value; once it does we are inside
    the cyclic group of ``x``'s powers, whose identity is found by walking
    successive multiples of that value.
    """
    seen = set()
    y = x
    while y not in seen:
        seen.add(y)
        y = S.op(y, y)
    z = y
    while S.op(z, z) != z:
        z = S.op(z, y)
    return z


def idempotent_leq(S: FiniteSemigroup, e0: int, e1: int) -> bool:
    for e in (e0, e1):
        if not S.is_idempotent(e):
            raise NotIdempotent(f"{e} is not idempotent")
    return S.op(e0, e1) == e0 and S.op(e1, e0) == e0


def minimal_idempotents(S: FiniteSemigroup, carrier: Optional[Iterable[int]] = None) -> list[int]:
    """Idempotents of the carrier with no strictly smaller idempotent in the carrier."""
    E = S.idempotents(carrier)
    return [e for e in E if not any(z != e and S.op(z, e) == z and S.op(e, z) == z for z in E)]


def set_leq(S: FiniteSemigroup, A: Iterable[int], B: Iterable[int]) -> bool:
    """``A <= B`` for subsemigroups: both ``A + B`` and ``B + A`` land in ``A``."""
    A = frozenset(A)
    return all(S.op(a, b) in A and S.op(b, a) in A for a in A for b in B)


def minimal_lift(S: FiniteSemigroup, A: Iterable[int], B: Iterable[int], b: int) -> int:
    """A minimal idempotent ``a`` of ``A`` with ``a <= b``, for ``A <= B`` and ``b`` in ``B``.

    Candidates are the minimal idempotents of ``A + b`` taken in index order;
    the first one also absorbed by ``b`` on the left is returned.  Such a
    candidate always exists; taking the first minimal idempotent blindly is
    not enough (see ``naive_lift_counterexample``).
    """
    A, B = frozenset(A), frozenset(B)
    if not (S.is_subsemigroup(A) and S.is_subsemigroup(B)):
        raise PreconditionFailed("A and B must be subsemigroups")
    if b not in B:
        raise PreconditionFailed(f"{b} is not in B")
    if not S.is_idempotent(b):
        raise NotIdempotent(f"{b} is not idempotent")
    if not set_leq(S, A, B):
        raise PreconditionFailed("A <= B fails")
    Ab = frozenset(S.op(a, b) for a in A)
    for a in minimal_idempotents(S, Ab):
        if S.op(b, a) == a and S.op(a, b) == a:
            return a
    raise PreconditionFailed("no minimal idempotent of A + b lies below b")


def naive_lift(S: FiniteSemigroup, A: Iterable[int], b: int) -> int:
    """First minimal idempotent of ``A + b``, with no check against ``b``."""
    Ab = frozenset(S.op(a, b) for a in A)
    return minimal_idempotents(S, Ab)[0]


def naive_lift_counterexample():
    """Two-element left-zero semigroup where the first minimal idempotent of A + b is not below b."""
    S = left_zero(2)
    A = B = frozenset({0, 1})
    return S, A, B, 1


def check_minimal_lift(S: FiniteSemigroup, A: frozenset, b: int, a: int) -> Optional[str]:
    """None when ``a`` is a minimal idempotent of ``A`` with ``a <= b``; else a reason."""
    if a not in A:
        return "not in A"
    if not S.is_idempotent(a):
        return "not idempotent"
    if not idempotent_leq(S, a, b):
        return "not below b"
    if a not in minimal_idempotents(S, A):
        return "not minimal in A"
    return None


@dataclass
class LiftReport:
    orders: tuple[int, ...]
    tables: int
    triples: int
    counterexamples: list
    naive_failures: int

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def to_json(self) -> dict:
        return {
            "orders": list(self.orders),
            "tables": self.tables,
            "triples": self.triples,
            "counterexamples": [
                {"table": [list(r) for r in S.table], "A": sorted(A), "B": sorted(B), "b": b, "reason": why}
                for S, A, B, b, why in self.counterexamples
            ],
            "naive_recipe_failures": self.naive_failures,
            "verdict": "OK" if self.ok else "COUNTEREXAMPLE",
        }


def verify_minimal_lift_exhaustive(max_order: int = 3, tables: Optional[Iterable[FiniteSemigroup]] = None) -> LiftReport:
    """Check ``minimal_lift`` on every valid (A, B, b) of every associative table."""
    if tables is None:
        tables = (S for n in range(1, max_order + 1) for S in all_semigroups(n))
    count = triples = naive_bad = 0
    bad = []
    for S in tables:
        count += 1
        subs = subsemigroups(S)
        for A in subs:
            for B in subs:
                if not set_leq(S, A, B):
                    continue
                for b in S.idempotents(B):
                    triples += 1
                    a = minimal_lift(S, A, B, b)
                    why = check_minimal_lift(S, A, b, a)
                    if why:
                        bad.append((S, A, B, b, why))
                    if check_minimal_lift(S, A, b, naive_lift(S, A, b)):
                        naive_bad += 1
    return LiftReport(tuple(range(1, max_order + 1)), count, triples, bad, naive_bad)
