from __future__ import annotations

import itertools
import math

import pytest

from treeramsey.errors import EnumerationBudgetExceeded, InvalidTree, NotRegressive, TreeMismatch
from treeramsey.trees import (
    RegressiveHom,
    RootedTree,
    all_trees,
    classify_node_set,
    compose_homs,
    enumerate_regressive_homs,
    identity_hom,
    is_regressive_hom,
    path_tree,
    predecessor,
    predecessor_hom,
    tree_leq,
    validate_tree,
)


def brute_force_homs(parents):
    """Every map nodes -> nodes sending each node into its root path and
    adjacent nodes to equal or adjacent nodes."""
    n = len(parents) + 1
    par = lambda v: None if v == 0 else parents[v - 1]

    def path(v):
        out = [v]
        while v:
            v = par(v)
            out.append(v)
        return out

    def adj(u, v):
        return u == v or par(u) == v or par(v) == u

    out = []
    for f in itertools.product(range(n), repeat=n):
        if all(f[v] in path(v) for v in range(n)) and all(adj(f[v], f[par(v)]) for v in range(1, n)):
            out.append(f)
    return out


def test_path_three_nodes_has_five_homs():
    homs = enumerate_regressive_homs(RootedTree((0, 1)))
    assert [h.values for h in homs] == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1), (0, 1, 2)]


@pytest.mark.parametrize("parents", [(), (0,), (0, 1), (0, 0), (0, 1, 2), (0, 0, 0), (0, 1, 1), (0, 1, 0),
                                     (0, 1, 2, 3), (0, 0, 1, 2)])
def test_enumeration_matches_brute_force(parents):
    got = [h.values for h in enumerate_regressive_homs(RootedTree(parents))]
    assert got == sorted(brute_force_homs(parents))


def test_tree_counts_are_factorials():
    # parent lists with p_k <= k: (n-1)! labelled recursive trees on n nodes
    for n in range(1, 6):
        assert sum(1 for _ in all_trees(n) if _.size == n) == math.factorial(n - 1)


def test_validate_tree_rejects_forward_parent():
    with pytest.raises(InvalidTree):
        validate_tree([0, 2])
    with pytest.raises(InvalidTree):
        validate_tree([-1])


def test_order_and_paths():
    t = RootedTree((0, 1, 0))
    assert t.ancestors(2) == (2, 1, 0)
    assert tree_leq(t, 2, 1) and tree_leq(t, 2, 0) and not tree_leq(t, 1, 2)
    assert not tree_leq(t, 3, 1)
    assert t.height(2) == 2 and t.max_height() == 2
    assert t.children(0) == (1, 3)
    assert predecessor(t, 2, 1) == 1 and predecessor(t, 2, 5) == 0


def test_classify_node_set():
    t = RootedTree((0, 1, 0))
    c = classify_node_set(t, {1, 2})
    assert c.is_chain and c.least == 2
    assert not classify_node_set(t, {2, 3}).is_chain


def test_regressive_checks_and_composition():
    t = path_tree(2)
    assert t.parents == (0, 1)
    with pytest.raises(NotRegressive):
        RegressiveHom(t, (0, 2, 2))
    assert not is_regressive_hom(t, (1, 1, 1))
    p1 = predecessor_hom(t, 1)
    assert p1.values == (0, 0, 1)
    assert compose_homs(p1, p1).values == (0, 0, 0)
    assert compose_homs(identity_hom(t), p1) == p1
    with pytest.raises(TreeMismatch):
        compose_homs(p1, identity_hom(RootedTree((0,))))


def test_composition_closed_on_small_trees():
    for t in all_trees(5):
        homs = enumerate_regressive_homs(t)
        vals = {h.values for h in homs}
        for f in homs:
            for g in homs:
                assert compose_homs(f, g).values in vals


def test_fold_is_regressive_but_not_order_preserving():
    f = RegressiveHom(RootedTree((0, 1)), (0, 1, 0))
    assert not f.is_order_preserving()


def test_enumeration_limit():
    with pytest.raises(EnumerationBudgetExceeded):
        enumerate_regressive_homs(RootedTree(tuple(range(11))))
