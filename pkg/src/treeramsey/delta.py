"""Finite windows of integer sets, their densities and difference sets, and the
block search that makes polynomial images of structured sums land in A - A."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import EmptyBox, OutOfWindow, TreeMismatch
from .polynomial import IntPolyVec
from .search import (
    DEFAULT_BUDGET,
    Factor,
    SearchInstance,
    SearchResult,
    enumerate_combinations,
    search_block_sequence,
    structural_problems,
    structured_sum,
)
from .trees import RootedTree, enumerate_regressive_homs
from .words import Var, WordContext, substitution_from_hom


@dataclass(frozen=True)
class DeltaScene:
    """A subset of Z^d known inside the window [lo, hi) (per axis)."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]
    points: frozenset
    description: str = ""

    @property
    def dim(self) -> int:
        return len(self.lo)

    def span(self, i: int) -> int:
        return self.hi[i] - self.lo[i]

    def in_window(self, x: Sequence[int]) -> bool:
        return all(l <= v < h for v, l, h in zip(x, self.lo, self.hi))

    def __contains__(self, x) -> bool:
        return tuple(x) in self.points


def scene_from_predicate(pred: Callable[[tuple], bool], lo: Sequence[int], hi: Sequence[int],
                         description: str = "") -> DeltaScene:
    lo, hi = tuple(lo), tuple(hi)
    pts = frozenset(x for x in itertools.product(*[range(a, b) for a, b in zip(lo, hi)]) if pred(x))
    return DeltaScene(lo, hi, pts, description)


def residue_scene(modulus: int, residues: Sequence[int], lo: int, hi: int) -> DeltaScene:
    res = frozenset(r % modulus for r in residues)
    return scene_from_predicate(lambda x: x[0] % modulus in res, (lo,), (hi,),
                                f"mod {modulus} in {' '.join(map(str, sorted(res)))}")


def scene_from_points(points, lo: Sequence[int], hi: Sequence[int]) -> DeltaScene:
    pts = frozenset(tuple(p) for p in points)
    scene = DeltaScene(tuple(lo), tuple(hi), pts, "points")
    if any(not scene.in_window(p) for p in pts):
        raise OutOfWindow("a listed point lies outside the window")
    return scene


def box_density(scene: DeltaScene, lo: Sequence[int], hi: Sequence[int]) -> Fraction:
    """Exact proportion of the box [lo, hi) occupied by the set."""
    lo, hi = tuple(lo), tuple(hi)
    if len(lo) != scene.dim or len(hi) != scene.dim:
        raise TreeMismatch("box dimension differs from the scene")
    if any(b <= a for a, b in zip(lo, hi)):
        raise EmptyBox(f"box [{lo}, {hi}) is empty")
    if any(a < l or b > h for a, b, l, h in zip(lo, hi, scene.lo, scene.hi)):
        raise OutOfWindow("box leaves the window")
    vol = 1
    for a, b in zip(lo, hi):
        vol *= b - a
    inside = sum(1 for p in scene.points if all(a <= v < b for v, a, b in zip(p, lo, hi)))
    return Fraction(inside, vol)


@dataclass(frozen=True)
class DensitySweep:
    density: Fraction
    box_lo: tuple[int, ...]
    box_hi: tuple[int, ...]
    note: str = "maximum over boxes of this shape inside the window; a lower bound for upper Banach density"


def sweep_density(scene: DeltaScene, shape: Sequence[int]) -> DensitySweep:
    best = None
    ranges = [range(l, h - s + 1) for l, h, s in zip(scene.lo, scene.hi, shape)]
    for corner in itertools.product(*ranges):
        top = tuple(c + s for c, s in zip(corner, shape))
        d = box_density(scene, corner, top)
        if best is None or d > best.density:
            best = DensitySweep(d, tuple(corner), top)
    if best is None:
        raise EmptyBox("shape does not fit in the window")
    return best


@dataclass(frozen=True)
class DeltaCheck:
    member: bool
    witness: Optional[tuple]
    edge_effect: bool


def delta_check(scene: DeltaScene, g: Sequence[int]) -> DeltaCheck:
    """Is g = b - a for some a, b of the set inside the window?

    ``edge_effect`` flags shifts longer than half the window on some axis,
    where a negative answer says little about the set itself.
    """
    g = tuple(g)
    if len(g) != scene.dim:
        raise TreeMismatch("shift dimension differs from the scene")
    if any(abs(v) > scene.span(i) for i, v in enumerate(g)):
        raise OutOfWindow(f"shift {g} exceeds the window span")
    edge = any(2 * abs(v) > scene.span(i) for i, v in enumerate(g))
    for a in sorted(scene.points):
        b = tuple(x + y for x, y in zip(a, g))
        if b in scene.points:
            return DeltaCheck(True, a, edge)
    return DeltaCheck(False, None, edge)


def delta_membership(scene: DeltaScene, g: Sequence[int]) -> bool:
    return delta_check(scene, g).member


@dataclass(frozen=True)
class GMap:
    """Position-dependent weights: position n carries g_n(node) in Z^m.

    ``periodic`` lists node -> vector tables; position n uses entry n mod length.
    The root always weighs zero.
    """

    periodic: tuple[tuple[tuple[int, ...], ...], ...]

    def weight(self, n: int, node: int) -> tuple[int, ...]:
        return self.periodic[n % len(self.periodic)][node]

    @property
    def dim(self) -> int:
        return len(self.periodic[0][0])

    @staticmethod
    def constant(tree: RootedTree, per_node: dict, dim: int = 1) -> "GMap":
        row = tuple(tuple(per_node.get(t, (0,) * dim)) if t else (0,) * dim for t in tree.nodes())
        return GMap((row,))


def g_value(gmap: GMap, word) -> tuple[int, ...]:
    acc = [0] * gmap.dim
    for p, s in word.entries:
        if isinstance(s, Var):
            for i, v in enumerate(gmap.weight(p, s.node)):
                acc[i] += v
    return tuple(acc)


class DeltaColoring:
    """Colour 1 when the polynomial image of the word's weight lies in A - A, else 0.

    Shifts beyond the window count as colour 0 (not certified).
    """

    colors = 2

    def __init__(self, scene: DeltaScene, gmap: GMap, poly: Optional[IntPolyVec]):
        self.scene, self.gmap, self.poly = scene, gmap, poly

    def value(self, word) -> tuple[int, ...]:
        s = g_value(self.gmap, word)
        return self.poly(s) if self.poly is not None else s

    def __call__(self, word) -> int:
        try:
            return int(delta_membership(self.scene, self.value(word)))
        except OutOfWindow:
            return 0

    def describe(self) -> str:
        return "delta membership"


def furstenberg_instance(scene: DeltaScene, tree: RootedTree, gmap: GMap, poly: Optional[IntPolyVec],
                         bound: int, m_blocks: int, schedule=None) -> SearchInstance:
    ctx = WordContext(tree)
    if schedule is None:
        schedule = (tuple(substitution_from_hom(ctx, h, "h" + "".join(map(str, h.values)))
                          for h in enumerate_regressive_homs(tree)),)
    out_dim = poly.dim if poly is not None else gmap.dim
    if out_dim != scene.dim:
        raise TreeMismatch(f"image dimension {out_dim} differs from scene dimension {scene.dim}")
    if poly is not None and poly.nvars != gmap.dim:
        raise TreeMismatch("polynomial arity differs from the weight dimension")
    col = DeltaColoring(scene, gmap, poly)
    return SearchInstance((Factor(ctx, schedule),), col, m_blocks, bound, required_color=1)


def furstenberg_search(scene: DeltaScene, tree: RootedTree, gmap: GMap, poly: Optional[IntPolyVec],
                       bound: int, m_blocks: int, schedule=None, budget: int = DEFAULT_BUDGET) -> SearchResult:
    """Blocks whose every structured sum is sent by the polynomial into A - A."""
    if not scene.points:
        warnings.warn("the set is empty inside the window", stacklevel=2)
    inst = furstenberg_instance(scene, tree, gmap, poly, bound, m_blocks, schedule)
    return search_block_sequence(inst, budget)


@dataclass
class DeltaVerification:
    ok: bool
    combinations: int
    failures: list
    edge_flags: int


def verify_delta_blocks(inst: SearchInstance, blocks) -> DeltaVerification:
    """Sweep every combination and test each image by a direct scan of the window."""
    col: DeltaColoring = inst.coloring
    scene = col.scene
    probs = structural_problems(inst, blocks)
    if probs:
        return DeltaVerification(False, 0, probs, 0)
    failures = []
    edges = 0
    count = 0
    for combo, _ in enumerate_combinations(inst):
        count += 1
        (w,) = structured_sum(inst, blocks, combo)
        g = col.value(w)
        if any(2 * abs(v) > scene.span(i) for i, v in enumerate(g)):
            edges += 1
        hit = any(tuple(x + y for x, y in zip(a, g)) in scene.points for a in scene.points)
        if not hit:
            failures.append({"parts": [list(x) for x in combo.parts[0]], "value": list(g)})
    return DeltaVerification(not failures, count, failures, edges)
