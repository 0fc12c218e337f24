"""Finite rooted trees, their order, and regressive homomorphisms.

A tree is given by a parent list: entry ``k`` is the parent of node ``k + 1``,
and node 0 is the root.  Parents always precede children, so node indices are
a topological order.  The tree order puts the root on top: ``u <= v`` means
that ``v`` lies on the path from ``u`` up to the root.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .errors import EnumerationBudgetExceeded, InvalidTree, NotRegressive, TreeMismatch

DEFAULT_HOM_NODE_LIMIT = 10


@dataclass(frozen=True)
class RootedTree:
    parents: tuple[int, ...]
    _ancestors: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _children: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        parents = tuple(int(p) for p in self.parents)
        for k, p in enumerate(parents):
            if not 0 <= p <= k:
                raise InvalidTree(f"node {k + 1} has parent {p}; parents must precede children")
        object.__setattr__(self, "parents", parents)
        n = len(parents) + 1
        anc: list[tuple[int, ...]] = [(0,)]
        kids: list[list[int]] = [[] for _ in range(n)]
        for v in range(1, n):
            p = parents[v - 1]
            anc.append((v,) + anc[p])
            kids[p].append(v)
        object.__setattr__(self, "_ancestors", tuple(anc))
        object.__setattr__(self, "_children", tuple(tuple(c) for c in kids))

    @property
    def root(self) -> int:
        return 0

    @property
    def size(self) -> int:
        return len(self.parents) + 1

    def nodes(self) -> range:
        return range(self.size)

    def parent(self, t: int) -> Optional[int]:
        return None if t == 0 else self.parents[t - 1]

    def children(self, t: int) -> tuple[int, ...]:
        return self._children[t]

    def height(self, t: int) -> int:
        return len(self._ancestors[t]) - 1

    def max_height(self) -> int:
        return max(self.height(t) for t in self.nodes())

    def ancestors(self, t: int) -> tuple[int, ...]:
        """Path from ``t`` up to the root, both included."""
        return self._ancestors[t]

    def edges(self) -> Iterator[tuple[int, int]]:
        for v in range(1, self.size):
            yield self.parents[v - 1], v

    def adjacent(self, u: int, v: int) -> bool:
        return (u > 0 and self.parents[u - 1] == v) or (v > 0 and self.parents[v - 1] == u)

    def to_text(self) -> str:
        return "[" + ",".join(str(p) for p in self.parents) + "]"

    def __str__(self):
        return self.to_text()


def validate_tree(parent_list: Sequence[int]) -> RootedTree:
    return RootedTree(tuple(parent_list))


def path_tree(length: int) -> RootedTree:
    """The path with ``length`` non-root nodes hanging below the root."""
    return RootedTree(tuple(range(length)))


def tree_leq(tree: RootedTree, u: int, v: int) -> bool:
    """True when ``v`` is on the root path of ``u``."""
    return v in tree.ancestors(u)


@dataclass(frozen=True)
class NodeSetClass:
    is_chain: bool
    least: Optional[int]
    within_branch: bool


def classify_node_set(tree: RootedTree, nodes: Iterable[int]) -> NodeSetClass:
    """Chain test for a node set.  The empty set is a chain with no least element.

    In a finite tree a node set lies inside one branch exactly when it is a
    chain, so both flags agree; they are reported separately for clarity.
    """
    ns = set(nodes)
    if not ns:
        return NodeSetClass(True, None, True)
    deepest = max(ns, key=tree.height)
    ok = ns.issubset(tree.ancestors(deepest))
    return NodeSetClass(ok, deepest if ok else None, ok)


def predecessor(tree: RootedTree, t: int, k: int) -> int:
    if k < 0:
        raise ValueError("k must be non-negative")
    anc = tree.ancestors(t)
    return anc[k] if k < len(anc) else 0


@dataclass(frozen=True)
class RegressiveHom:
    tree: RootedTree
    values: tuple[int, ...]

    def __call__(self, t: int) -> int:
        return self.values[t]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if len(self.values) != self.tree.size:
            raise NotRegressive(f"map has {len(self.values)} entries for {self.tree.size} nodes")
        if not is_regressive_hom(self.tree, self.values):
            raise NotRegressive(f"{list(self.values)} is not a regressive homomorphism of {self.tree}")

    def is_identity(self) -> bool:
        return all(v == t for t, v in enumerate(self.values))

    def is_order_preserving(self) -> bool:
        t = self.tree
        return all(tree_leq(t, self.values[c], self.values[p]) for p, c in t.edges())


def is_regressive_hom(tree: RootedTree, values: Sequence[int]) -> bool:
    if len(values) != tree.size:
        return False
    for t, v in enumerate(values):
        if not 0 <= v < tree.size or v not in tree.ancestors(t):
            return False
    for p, c in tree.edges():
        a, b = values[p], values[c]
        if a != b and not tree.adjacent(a, b):
            return False
    return True


def identity_hom(tree: RootedTree) -> RegressiveHom:
    return RegressiveHom(tree, tuple(tree.nodes()))


def predecessor_hom(tree: RootedTree, k: int) -> RegressiveHom:
    return RegressiveHom(tree, tuple(predecessor(tree, t, k) for t in tree.nodes()))


def enumerate_regressive_homs(tree: RootedTree, limit: Optional[int] = DEFAULT_HOM_NODE_LIMIT) -> list[RegressiveHom]:
    """All regressive homomorphisms, in lexicographic order of their value tuples.

    Values are fixed node by node; a child's image is restricted to its own
    ancestors that equal or neighbour the parent's image.
    """
    if limit is not None and tree.size > limit:
        raise EnumerationBudgetExceeded(f"tree has {tree.size} nodes, limit is {limit}")
    out = []
    vals = [0] * tree.size

    def extend(v: int):
        if v == tree.size:
            out.append(RegressiveHom(tree, tuple(vals)))
            return
        fp = vals[tree.parents[v - 1]]
        for cand in sorted(tree.ancestors(v)):
            if cand == fp or tree.adjacent(cand, fp):
                vals[v] = cand
                extend(v + 1)

    extend(1)
    return out


def compose_homs(f: RegressiveHom, g: RegressiveHom) -> RegressiveHom:
    """``f`` after ``g``."""
    if f.tree != g.tree:
        raise TreeMismatch("homomorphisms live on different trees")
    return RegressiveHom(f.tree, tuple(f.values[g.values[t]] for t in f.tree.nodes()))


def all_trees(max_nodes: int) -> Iterator[RootedTree]:
    """Every parent list with at most ``max_nodes`` nodes (labelled, parents first)."""
    for n in range(1, max_nodes + 1):
        for parents in itertools.product(*[range(k + 1) for k in range(n - 1)]):
            yield RootedTree(parents)
