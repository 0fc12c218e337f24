"""Finite searches for block sequences whose structured sums are colour-regular.

An instance has one or more factors, each a word context with a schedule of
endomorphisms per step.  A block sequence picks, for every factor, step and
node, a word in that node's component, with supports increasing from one
step to the next (for nonlocated factors: with a prescribed length per step).

A combination picks nonempty step sets F_0 < F_1 < ... (one per coordinate)
and, for every step d used, a node and an endomorphism.  The images of the
chosen nodes under the chosen spines must form a chain for each coordinate;
its least element is that coordinate's label.  The structured sum of a
combination adds the transformed blocks step by step.  A witness is a block
sequence on which the colour of the structured sum depends only on the
label tuple.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

from .colorings import CachedColoring
from .errors import BudgetExceeded
from .trees import RootedTree
from .words import (
    NONLOCATED,
    StringWord,
    SubstitutionMap,
    Word,
    WordContext,
    add_words,
    empty_word,
    format_word,
    substitution_apply,
    try_classify,
)
from .actions import component_words

DEFAULT_BUDGET = 5_000_000


@dataclass(frozen=True)
class Factor:
    context: WordContext
    schedule: tuple[tuple[SubstitutionMap, ...], ...]
    name: str = "main"

    def endos_at(self, step: int) -> tuple[SubstitutionMap, ...]:
        return self.schedule[min(step, len(self.schedule) - 1)]

    @property
    def tree(self) -> RootedTree:
        return self.context.tree

    @property
    def located(self) -> bool:
        return self.context.kind != NONLOCATED

    def root_trivial(self) -> bool:
        return not self.context.alphabet

    def block_nodes(self) -> tuple[int, ...]:
        """Nodes offered to combinations; a letter-free root only carries the empty word."""
        start = 1 if self.root_trivial() else 0
        return tuple(range(start, self.tree.size))


@dataclass(frozen=True)
class SearchInstance:
    factors: tuple[Factor, ...]
    coloring: object
    blocks: int
    bound: int
    coords: tuple[int, ...] = (0,)
    freshness: tuple[int, ...] = ()
    lengths: tuple[int, ...] = ()
    colors: int = 2
    required_color: Optional[int] = None

    def fresh_floor(self, step: int) -> int:
        if not self.freshness:
            return 0
        return self.freshness[min(step, len(self.freshness) - 1)] + 1

    def min_length(self, step: int) -> int:
        if not self.lengths:
            return 1
        return max(1, self.lengths[min(step, len(self.lengths) - 1)])

    def used_factors(self) -> list[int]:
        return sorted(set(self.coords))

    def contexts(self) -> tuple[WordContext, ...]:
        return tuple(self.factors[i].context for i in self.coords)


# A block sequence: blocks[factor][step][node] -> word.
Blocks = tuple


@dataclass(frozen=True)
class Combination:
    """parts[s] lists (step, node, endo index) for coordinate s, steps increasing."""

    parts: tuple[tuple[tuple[int, int, int], ...], ...]

    def steps(self, s: int) -> tuple[int, ...]:
        return tuple(d for d, _, _ in self.parts[s])


def _chain_least(tree: RootedTree, nodes) -> Optional[int]:
    deepest = max(nodes, key=tree.height)
    anc = tree.ancestors(deepest)
    return deepest if all(v in anc for v in nodes) else None


def _choices(inst: SearchInstance, i: int, d: int):
    f = inst.factors[i]
    out = []
    for t in f.block_nodes():
        for k, e in enumerate(f.endos_at(d)):
            out.append((t, k, e.spine_values()[t]))
    return out


def _coordinate_parts(inst: SearchInstance, i: int, lo: int, hi: int, last: Optional[tuple] = None):
    """Selections for one coordinate using steps in [lo, hi).

    With ``last = (n, t)`` the selection must end at step n with node t.
    Yields (parts, least).
    """
    tree = inst.factors[i].tree
    top = hi if last is None else last[0]

    def rec(d, parts, spines):
        if d == top:
            if last is not None:
                n, t = last
                for tt, k, v in _choices(inst, i, n):
                    if tt != t:
                        continue
                    least = _chain_least(tree, spines + [v])
                    if least is not None:
                        yield parts + ((n, t, k),), least
            elif parts:
                yield parts, _chain_least(tree, spines)
            return
        yield from rec(d + 1, parts, spines)
        for t, k, v in _choices(inst, i, d):
            if spines and _chain_least(tree, spines + [v]) is None:
                continue
            yield from rec(d + 1, parts + ((d, t, k),), spines + [v])

    yield from rec(lo, (), [])


def enumerate_combinations(inst: SearchInstance, steps: Optional[int] = None) -> Iterator[tuple[Combination, tuple]]:
    """Every admissible combination over the first ``steps`` steps, with its label tuple."""
    B = inst.blocks if steps is None else steps
    m = len(inst.coords)

    def rec(s, lo, parts, labels):
        if s == m:
            yield Combination(tuple(parts)), tuple(labels)
            return
        for p, least in _coordinate_parts(inst, inst.coords[s], lo, B):
            yield from rec(s + 1, p[-1][0] + 1, parts + [p], labels + [least])

    yield from rec(0, 0, [], [])


def count_combinations(inst: SearchInstance) -> int:
    return sum(1 for _ in enumerate_combinations(inst))


def _combinations_ending(inst: SearchInstance, n: int, t: int) -> Iterator[tuple[Combination, tuple]]:
    """Combinations whose largest step is n, taken at node t."""
    m = len(inst.coords)
    i_last = inst.coords[-1]

    def before(s, hi, parts, labels):
        # coordinates s, s-1, ..., 0 use steps below hi, each wholly below the next
        if s < 0:
            yield list(reversed(parts)), list(reversed(labels))
            return
        for p, least in _coordinate_parts(inst, inst.coords[s], 0, hi):
            yield from before(s - 1, p[0][0], parts + [p], labels + [least])

    for p_last, least_last in _coordinate_parts(inst, i_last, 0, n + 1, last=(n, t)):
        for parts, labels in before(m - 2, p_last[0][0], [], []):
            yield Combination(tuple(parts) + (p_last,)), tuple(labels) + (least_last,)


def structured_sum(inst: SearchInstance, blocks: Blocks, combo: Combination) -> tuple[Word, ...]:
    out = []
    for s, parts in enumerate(combo.parts):
        i = inst.coords[s]
        f = inst.factors[i]
        acc = empty_word(f.context)
        for d, t, k in parts:
            acc = add_words(acc, substitution_apply(f.endos_at(d)[k], blocks[i][d][t]))
        out.append(acc)
    return tuple(out)


def _color_of(inst: SearchInstance, coloring, words: tuple) -> int:
    return coloring(words[0] if len(words) == 1 else words)


# ---------------------------------------------------------------------------
# Witness checking (fresh enumeration, no search state).

@dataclass
class CheckReport:
    ok: bool
    combinations: int
    groups: dict
    violation: Optional[dict] = None
    problems: list = field(default_factory=list)
    coverage_hash: str = ""


def structural_problems(inst: SearchInstance, blocks: Blocks) -> list[str]:
    out = []
    if len(blocks) != len(inst.factors):
        return [f"{len(blocks)} factors in witness, {len(inst.factors)} in instance"]
    for i in inst.used_factors():
        f = inst.factors[i]
        if len(blocks[i]) != inst.blocks:
            out.append(f"factor {f.name}: {len(blocks[i])} steps, expected {inst.blocks}")
            continue
        prev_top = -1
        total = 0
        for n, row in enumerate(blocks[i]):
            if len(row) != f.tree.size:
                out.append(f"factor {f.name} step {n}: wrong number of nodes")
                continue
            lens = set()
            for t, w in enumerate(row):
                if isinstance(w, StringWord) == f.located:
                    out.append(f"factor {f.name} step {n} node {t}: wrong word kind")
                    continue
                c = try_classify(w, f.tree)
                if c != t:
                    out.append(f"factor {f.name} step {n} node {t}: word lies in component {c}")
                if t == 0 and f.root_trivial():
                    continue
                if not w:
                    out.append(f"factor {f.name} step {n} node {t}: empty block")
                if f.located:
                    if w.support and (w.support[0] <= prev_top or w.support[0] < inst.fresh_floor(n)):
                        out.append(f"factor {f.name} step {n} node {t}: support not fresh")
                    if w.support and w.support[-1] >= inst.bound:
                        out.append(f"factor {f.name} step {n} node {t}: support beyond bound")
                else:
                    lens.add(len(w))
                    if len(w) < inst.min_length(n):
                        out.append(f"factor {f.name} step {n} node {t}: shorter than the length schedule")
            if f.located:
                tops = [w.support[-1] for w in row if w.support]
                prev_top = max([prev_top] + tops)
            else:
                if len(lens) > 1:
                    out.append(f"factor {f.name} step {n}: blocks of unequal length")
                total += max(lens) if lens else 0
        if not f.located and total > inst.bound:
            out.append(f"factor {f.name}: total length {total} exceeds bound {inst.bound}")
    return out


def describe_combination(inst: SearchInstance, combo: Combination) -> list:
    out = []
    for s, parts in enumerate(combo.parts):
        f = inst.factors[inst.coords[s]]
        out.append([[d, t, f.endos_at(d)[k].name or str(k)] for d, t, k in parts])
    return out


def check_block_witness(inst: SearchInstance, blocks: Blocks, coloring=None) -> CheckReport:
    """Enumerate every admissible combination and test colour constancy per label tuple."""
    coloring = inst.coloring if coloring is None else coloring
    probs = structural_problems(inst, blocks)
    if probs:
        return CheckReport(False, 0, {}, None, probs)
    groups: dict = {}
    first: dict = {}
    h = hashlib.sha256()
    count = 0
    violation = None
    ctxs = inst.contexts()
    for combo, labels in enumerate_combinations(inst):
        count += 1
        words = structured_sum(inst, blocks, combo)
        c = _color_of(inst, coloring, words)
        h.update(json.dumps([describe_combination(inst, combo), list(labels),
                             [format_word(w, ctxs[s]) for s, w in enumerate(words)], c]).encode())
        h.update(b"\n")
        if violation is not None:
            continue
        if inst.required_color is not None and c != inst.required_color:
            violation = {"combination": describe_combination(inst, combo), "labels": list(labels),
                         "sum": [format_word(w, ctxs[s]) for s, w in enumerate(words)], "color": c,
                         "required": inst.required_color}
        elif labels in groups and groups[labels] != c:
            other, owords = first[labels]
            violation = {"combination": describe_combination(inst, combo), "labels": list(labels),
                         "sum": [format_word(w, ctxs[s]) for s, w in enumerate(words)], "color": c,
                         "conflicts_with": describe_combination(inst, other),
                         "conflicting_sum": [format_word(w, ctxs[s]) for s, w in enumerate(owords)],
                         "conflicting_color": groups[labels]}
        else:
            groups.setdefault(labels, c)
            first.setdefault(labels, (combo, words))
    return CheckReport(violation is None, count, groups, violation, [], h.hexdigest())


# ---------------------------------------------------------------------------
# Backtracking search.

@dataclass
class SearchResult:
    status: str
    blocks: Optional[Blocks]
    bound: int
    explored: int
    window: Optional[int] = None

    @property
    def found(self) -> bool:
        return self.status == "found"


class _Engine:
    def __init__(self, inst: SearchInstance, budget: int, coloring=None):
        self.inst = inst
        self.budget = budget
        self.coloring = CachedColoring(inst.coloring if coloring is None else coloring)
        self.explored = 0
        self.used = inst.used_factors()
        self.order = []
        for n in range(inst.blocks):
            for i in self.used:
                f = inst.factors[i]
                for t in range(f.tree.size):
                    self.order.append((n, i, t))
        self.ending = {}

    def combos_ending(self, n, t):
        key = (n, t)
        if key not in self.ending:
            self.ending[key] = list(_combinations_ending(self.inst, n, t))
        return self.ending[key]

    def check_new(self, blocks, n, i, t, groups, added) -> bool:
        inst = self.inst
        if i != inst.coords[-1]:
            return True
        f = inst.factors[i]
        if t == 0 and f.root_trivial():
            return True
        for combo, labels in self.combos_ending(n, t):
            c = _color_of(inst, self.coloring, structured_sum(inst, blocks, combo))
            if inst.required_color is not None:
                if c != inst.required_color:
                    return False
                continue
            old = groups.get(labels)
            if old is None:
                groups[labels] = c
                added.append(labels)
            elif old != c:
                return False
        return True

    def candidates(self, blocks, n, i, t, window, lengths):
        inst = self.inst
        f = inst.factors[i]
        if t == 0 and f.root_trivial():
            return [empty_word(f.context)]
        if f.located:
            lo = inst.fresh_floor(n)
            for d in range(n):
                for w in blocks[i][d]:
                    if w is not None and w.support:
                        lo = max(lo, w.support[-1] + 1)
            return component_words(f.context, t, lo, window)
        ell = lengths[i][n]
        return component_words(f.context, t, ell, ell + 1)

    def run(self, window: int, length_plan=None) -> Optional[Blocks]:
        inst = self.inst
        blocks = [[[None] * inst.factors[i].tree.size for _ in range(inst.blocks)] for i in range(len(inst.factors))]
        groups: dict = {}
        order = self.order

        def rec(k):
            if k == len(order):
                return True
            n, i, t = order[k]
            for w in self.candidates(blocks, n, i, t, window, length_plan):
                self.explored += 1
                if self.explored > self.budget:
                    raise BudgetExceeded(f"explored {self.explored} candidate blocks")
                blocks[i][n][t] = w
                added = []
                if self.check_new(blocks, n, i, t, groups, added) and rec(k + 1):
                    return True
                for lab in added:
                    del groups[lab]
            blocks[i][n][t] = None
            return False

        if rec(0):
            return freeze_blocks(blocks, inst)
        return None


def freeze_blocks(blocks, inst: SearchInstance) -> Blocks:
    out = []
    for i, f in enumerate(inst.factors):
        if i >= len(blocks) or i not in inst.used_factors():
            out.append(())
            continue
        out.append(tuple(tuple(row) for row in blocks[i]))
    return tuple(out)


def _length_plans(inst: SearchInstance, total: int) -> Iterator[dict]:
    """Per-step lengths with the given total, for every nonlocated factor (shared plan)."""
    B = inst.blocks
    mins = [inst.min_length(n) for n in range(B)]

    def rec(n, left, acc):
        if n == B - 1:
            if left >= mins[n]:
                yield acc + [left]
            return
        for ell in range(mins[n], left - sum(mins[n + 1:]) + 1):
            yield from rec(n + 1, left - ell, acc + [ell])

    for plan in rec(0, total, []):
        yield {i: plan for i in range(len(inst.factors))}


def search_block_sequence(inst: SearchInstance, budget: int = DEFAULT_BUDGET, coloring=None) -> SearchResult:
    """Smallest-window-first backtracking search.

    Located factors: windows [0, W) for W = 1..bound, so a witness with the
    smallest possible largest position is returned first.  Nonlocated
    factors: the block lengths must add up to exactly ``bound``; length
    plans are tried in lexicographic order.
    """
    eng = _Engine(inst, budget, coloring)
    located = all(inst.factors[i].located for i in eng.used)
    if located:
        for W in range(1, inst.bound + 1):
            res = eng.run(W)
            if res is not None:
                return SearchResult("found", res, inst.bound, eng.explored, W)
        return SearchResult("exhausted", None, inst.bound, eng.explored)
    if any(inst.factors[i].located for i in eng.used):
        raise ValueError("mixing located and nonlocated factors is not supported")
    for plan in _length_plans(inst, inst.bound):
        res = eng.run(inst.bound, plan)
        if res is not None:
            return SearchResult("found", res, inst.bound, eng.explored, inst.bound)
    return SearchResult("exhausted", None, inst.bound, eng.explored)


def incremental_consistent(inst: SearchInstance, blocks: Blocks, coloring=None) -> bool:
    """Replay a full block sequence through the search's incremental test."""
    if structural_problems(inst, blocks):
        return False
    eng = _Engine(inst, DEFAULT_BUDGET, coloring)
    work = [[[None] * inst.factors[i].tree.size for _ in range(inst.blocks)] for i in range(len(inst.factors))]
    groups: dict = {}
    for n, i, t in eng.order:
        work[i][n][t] = blocks[i][n][t]
        if not eng.check_new(work, n, i, t, groups, []):
            return False
    return True


def with_bound(inst: SearchInstance, bound: int) -> SearchInstance:
    return replace(inst, bound=bound)
