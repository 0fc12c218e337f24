from __future__ import annotations

import warnings
from fractions import Fraction

import pytest

from treeramsey.delta import (
    GMap,
    box_density,
    delta_check,
    delta_membership,
    furstenberg_instance,
    furstenberg_search,
    residue_scene,
    scene_from_points,
    scene_from_predicate,
    sweep_density,
    verify_delta_blocks,
)
from treeramsey.errors import EmptyBox, OutOfWindow, TreeMismatch
from treeramsey.polynomial import parse_poly_vec
from treeramsey.search import check_block_witness
from treeramsey.trees import RootedTree

I1 = RootedTree((0,))
EVENS = scene_from_predicate(lambda x: x[0] % 2 == 0, (0,), (40,))


def test_densities():
    assert box_density(EVENS, (0,), (10,)) == Fraction(1, 2)
    assert box_density(scene_from_points([], (0,), (10,)), (0,), (10,)) == 0
    assert box_density(residue_scene(5, [0, 1], 0, 200), (0,), (50,)) == Fraction(2, 5)
    sw = sweep_density(residue_scene(5, [0, 1], 0, 200), (3,))
    assert sw.density == Fraction(2, 3)


def test_density_errors():
    with pytest.raises(EmptyBox):
        box_density(EVENS, (5,), (5,))
    with pytest.raises(OutOfWindow):
        box_density(EVENS, (0,), (41,))
    with pytest.raises(TreeMismatch):
        box_density(EVENS, (0, 0), (1, 1))
    with pytest.raises(OutOfWindow):
        scene_from_points([(50,)], (0,), (10,))


def test_union_subadditive():
    a = scene_from_predicate(lambda x: x[0] % 3 == 0, (0,), (30,))
    b = scene_from_predicate(lambda x: x[0] % 3 == 1, (0,), (30,))
    u = scene_from_points(a.points | b.points, (0,), (30,))
    for lo, hi in [((0,), (30,)), ((1,), (8,)), ((4,), (29,))]:
        assert box_density(u, lo, hi) <= box_density(a, lo, hi) + box_density(b, lo, hi)
        assert box_density(u, lo, hi) == box_density(a, lo, hi) + box_density(b, lo, hi)


def test_membership():
    assert delta_membership(EVENS, (4,))
    assert not delta_membership(EVENS, (3,))
    assert delta_membership(residue_scene(5, [0, 1], 0, 200), (1,))
    assert delta_check(EVENS, (-6,)).witness == (6,)
    with pytest.raises(OutOfWindow):
        delta_check(EVENS, (41,))
    assert delta_check(EVENS, (30,)).edge_effect
    assert not delta_check(EVENS, (10,)).edge_effect


def test_gmap_root_weight_is_zero():
    g = GMap.constant(I1, {0: (5,), 1: (2,)})
    assert g.weight(3, 0) == (0,) and g.weight(3, 1) == (2,)


def test_evens_blocks_have_even_sums():
    g = GMap.constant(I1, {1: (1,)})
    res = furstenberg_search(EVENS, I1, g, None, bound=10, m_blocks=2)
    assert res.found
    for row in res.blocks[0]:
        assert len(row[1].entries) % 2 == 0
    inst = furstenberg_instance(EVENS, I1, g, None, 10, 2)
    v = verify_delta_blocks(inst, res.blocks)
    assert v.ok and v.combinations == 8  # identity and collapse at each of the two steps


def test_full_set_takes_first_blocks():
    full = scene_from_predicate(lambda x: True, (0,), (20,))
    g = GMap.constant(I1, {1: (1,)})
    res = furstenberg_search(full, I1, g, None, bound=10, m_blocks=2)
    assert [row[1].support for row in res.blocks[0]] == [(0,), (1,)]


def test_mod5_quadratic():
    scene = residue_scene(5, [0, 1], 0, 200)
    g = GMap.constant(I1, {1: (1,)})
    poly = parse_poly_vec("z*(z-1)/2", 1)
    res = furstenberg_search(scene, I1, g, poly, bound=40, m_blocks=2)
    assert res.found
    inst = furstenberg_instance(scene, I1, g, poly, 40, 2)
    assert check_block_witness(inst, res.blocks).ok
    v = verify_delta_blocks(inst, res.blocks)
    assert v.ok and not v.failures


def test_empty_set_warns_and_exhausts():
    empty = scene_from_points([], (0,), (10,))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = furstenberg_search(empty, I1, GMap.constant(I1, {1: (1,)}), None, bound=4, m_blocks=1)
    assert not res.found and caught


def test_dimension_checks():
    g = GMap.constant(I1, {1: (1, 0)}, dim=2)
    with pytest.raises(TreeMismatch):
        furstenberg_instance(EVENS, I1, g, None, 5, 1)
