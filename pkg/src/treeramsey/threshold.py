"""Exact finite thresholds: the least bound at which every r-colouring has a witness.

For a fixed bound every candidate block sequence is enumerated once.  Each
one becomes a constraint: a list of word groups (one per label tuple) that
must all be monochromatic.  A colouring has a witness exactly when it
satisfies some constraint.  Colourings of the words that occur in
constraints are then explored depth-first in universe order, using only
colour-canonical prefixes (each new colour is at most one more than the
largest used so far), and a branch is closed as soon as a constraint is
satisfied by the colours fixed so far.  Reaching a full colouring with no
satisfied constraint exhibits an avoiding colouring.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

from .colorings import TableColoring
from .search import (
    SearchInstance,
    _Engine,
    _length_plans,
    enumerate_combinations,
    freeze_blocks,
    search_block_sequence,
    structured_sum,
)
from .words import StringWord, format_word


def _word_key(w):
    if isinstance(w, StringWord):
        return (len(w), [(0 if hasattr(s, "index") else 1, getattr(s, "index", getattr(s, "node", 0))) for s in w.symbols])
    return (len(w), [(p, 0 if hasattr(s, "index") else 1, getattr(s, "index", getattr(s, "node", 0))) for p, s in w.entries])


def _universe_key(ws: tuple):
    return (sum(len(w) for w in ws), [_word_key(w) for w in ws])


def all_block_sequences(inst: SearchInstance) -> Iterator[tuple]:
    """Every block sequence within the bound, in the search's candidate order."""
    eng = _Engine(inst, budget=10 ** 12)
    located = all(inst.factors[i].located for i in eng.used)
    plans = [None] if located else list(_length_plans(inst, inst.bound))
    for plan in plans:
        blocks = [[[None] * inst.factors[i].tree.size for _ in range(inst.blocks)] for i in range(len(inst.factors))]

        def rec(k):
            if k == len(eng.order):
                yield freeze_blocks(blocks, inst)
                return
            n, i, t = eng.order[k]
            for w in eng.candidates(blocks, n, i, t, inst.bound, plan):
                blocks[i][n][t] = w
                yield from rec(k + 1)
            blocks[i][n][t] = None

        yield from rec(0)


@dataclass
class ConstraintSystem:
    universe: list
    constraints: list
    sequences: int

    def by_last(self) -> list:
        out = [[] for _ in self.universe]
        for con in self.constraints:
            last = max(max(g) for g in con)
            out[last].append(con)
        return out


def build_constraints(inst: SearchInstance) -> ConstraintSystem:
    combos = list(enumerate_combinations(inst))
    raw = []
    seqs = 0
    trivial = False
    for blocks in all_block_sequences(inst):
        seqs += 1
        groups: dict = {}
        for combo, labels in combos:
            ws = structured_sum(inst, blocks, combo)
            groups.setdefault(labels, set()).add(ws)
        con = [g for g in groups.values() if len(g) > 1]
        if not con:
            trivial = True
        raw.append(con)
    words = sorted({w for con in raw for g in con for w in g}, key=_universe_key)
    idx = {w: k for k, w in enumerate(words)}
    cons = set()
    for con in raw:
        if con:
            cons.add(tuple(sorted(tuple(sorted(idx[w] for w in g)) for g in con)))
    cons = sorted(cons)
    if trivial:
        cons = [()]
    return ConstraintSystem(words, cons, seqs)


def _masks(by_last: list) -> list:
    """Constraints as tuples of group bitmasks, indexed by their last universe word."""
    return [[tuple(sum(1 << k for k in g) for g in con) for con in cons] for cons in by_last]


def _satisfied(con, masks) -> bool:
    for g in con:
        for m in masks:
            if m & g == g:
                break
        else:
            return False
    return True


def _dfs(n_words: int, by_last: list, r: int, prefix: tuple, depth: int, on_leaf) -> int:
    """Canonical colourings in universe order, pruning covered branches.

    ``on_leaf(colors)`` is called at index ``depth`` (or the end) and returns
    True to stop.  Returns the number of nodes visited.
    """
    cons = _masks(by_last)
    colors = list(prefix) + [0] * (n_words - len(prefix))
    masks = [0] * r
    for k, c in enumerate(prefix):
        masks[c] |= 1 << k
    nodes = 0

    def rec(i, top):
        nonlocal nodes
        if i == depth:
            return on_leaf(colors[:i])
        for c in range(min(r, top + 2)):
            nodes += 1
            colors[i] = c
            bit = 1 << i
            masks[c] |= bit
            covered = any(_satisfied(con, masks) for con in cons[i])
            stop = False if covered else rec(i + 1, max(top, c))
            masks[c] &= ~bit
            if stop:
                return True
        return False

    rec(len(prefix), max(prefix) if prefix else -1)
    return nodes


def _explore(n_words: int, by_last: list, r: int, prefix: tuple) -> tuple[Optional[tuple], int]:
    """Depth-first search for an avoiding colouring extending ``prefix``.

    Returns (avoiding colouring or None, number of nodes visited).
    """
    found = []

    def leaf(colors):
        found.append(tuple(colors))
        return True

    nodes = _dfs(n_words, by_last, r, prefix, n_words, leaf)
    return (found[0] if found else None), nodes


def _prefixes(n_words: int, by_last: list, r: int, depth: int) -> tuple[list, int]:
    """Canonical, not yet covered colour prefixes of the given depth, and the nodes above it."""
    out = []

    def leaf(colors):
        out.append(tuple(colors))
        return False

    nodes = _dfs(n_words, by_last, r, (), depth, leaf)
    return out, nodes


def _job(args):
    n_words, by_last, r, prefix = args
    return _explore(n_words, by_last, r, prefix)


@dataclass
class BoundReport:
    bound: int
    universe: int
    sequences: int
    constraints: int
    certified: bool
    nodes: Optional[int] = None
    avoiding: Optional[list] = None
    method: str = "exhaustive"

    def to_json(self) -> dict:
        d = {"bound": self.bound, "universe": self.universe, "sequences": self.sequences,
             "constraints": self.constraints, "certified": self.certified, "method": self.method}
        if self.nodes is not None:
            d["nodes"] = self.nodes
        if self.avoiding is not None:
            d["avoiding_coloring"] = self.avoiding
        return d


def certify_bound(inst: SearchInstance, r: int, jobs: int = 1, cross_check: bool = True) -> BoundReport:
    system = build_constraints(inst)
    U = system.universe
    ctxs = inst.contexts()
    if system.constraints == [()]:
        return BoundReport(inst.bound, len(U), system.sequences, 0, True, 0)
    by_last = system.by_last()
    if jobs <= 1 or len(U) < 8:
        avoid, nodes = _explore(len(U), by_last, r, ())
    else:
        depth = min(6, len(U))
        prefixes, above = _prefixes(len(U), by_last, r, depth)
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_job, [(len(U), by_last, r, p) for p in prefixes]))
        avoid = next((a for a, _ in results if a is not None), None)
        nodes = None if avoid is not None else above + sum(nd for _, nd in results)
    if avoid is None:
        return BoundReport(inst.bound, len(U), system.sequences, len(system.constraints), True, nodes)
    table = {(w[0] if len(w) == 1 else w): c for w, c in zip(U, avoid)}
    if cross_check:
        col = TableColoring(table, r)
        res = search_block_sequence(replace(inst, coloring=col))
        if res.found:
            raise AssertionError("avoiding colouring admits a witness; constraint system is wrong")
    listing = [[[format_word(x, ctxs[s]) for s, x in enumerate(w)], c] for w, c in zip(U, avoid)]
    return BoundReport(inst.bound, len(U), system.sequences, len(system.constraints), False, None, listing)


@dataclass
class ThresholdResult:
    value: Optional[int]
    colors: int
    reports: list = field(default_factory=list)
    monotone_checked: bool = False

    @property
    def status(self) -> str:
        return "found" if self.value is not None else "unknown"

    def to_json(self) -> dict:
        return {"value": self.value, "colors": self.colors, "status": self.status,
                "monotone_checked": self.monotone_checked,
                "bounds": [r.to_json() for r in self.reports]}


def constraints_embed(small: SearchInstance, large: SearchInstance) -> bool:
    """Every constraint at the smaller bound reappears at the larger one."""
    def as_sets(system):
        return {frozenset(frozenset(system.universe[k] for k in g) for g in con) for con in system.constraints}
    a, b = build_constraints(small), build_constraints(large)
    if b.constraints == [()]:
        return True
    return as_sets(a) <= as_sets(b)


def threshold(inst: SearchInstance, colors: int, max_bound: int, min_bound: int = 1, jobs: int = 1,
              check_next: bool = True) -> ThresholdResult:
    """Least bound N in [min_bound, max_bound] at which every colouring admits a witness.

    With ``check_next`` the bound N+1 is checked as well (when within
    ``max_bound``).  For located instances every bound-N block sequence is
    also a bound-(N+1) sequence with the same sums, so the check verifies
    that inclusion of constraint systems; nonlocated instances are
    certified again from scratch.
    """
    res = ThresholdResult(None, colors)
    located = all(inst.factors[i].located for i in inst.used_factors())
    for N in range(min_bound, max_bound + 1):
        rep = certify_bound(replace(inst, bound=N), colors, jobs)
        res.reports.append(rep)
        if rep.certified:
            res.value = N
            if check_next and N + 1 <= max_bound:
                if located:
                    big = replace(inst, bound=N + 1)
                    if not constraints_embed(replace(inst, bound=N), big):
                        raise AssertionError(f"constraints at bound {N} do not embed at {N + 1}")
                    sys1 = build_constraints(big)
                    nxt = BoundReport(N + 1, len(sys1.universe), sys1.sequences, len(sys1.constraints),
                                      True, None, None, "inclusion")
                else:
                    nxt = certify_bound(replace(inst, bound=N + 1), colors, jobs)
                res.reports.append(nxt)
                if not nxt.certified:
                    raise AssertionError(f"bound {N} certified but {N + 1} is not")
                res.monotone_checked = True
            return res
    return res
