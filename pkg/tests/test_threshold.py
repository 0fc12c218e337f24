from __future__ import annotations

import itertools

import pytest

from treeramsey.threshold import build_constraints, certify_bound, constraints_embed, threshold

from _support import instance

HJ = ("tree [0]\nalphabet a b\nkind nonlocated\nendo sa = subst {1: 'a'}\nendo sb = subst {1: 'b'}\n"
      "schedule sa sb\ncoloring expr 0\nblocks 1\nbound {N}\n")
PAIRS = "tree [0]\ncoloring expr 0\nblocks 2\nbound {N}\n"


def _hj_line_exists(coloring: dict, N: int) -> bool:
    """A monochromatic combinatorial line among strings of length N over {a, b}."""
    for pattern in itertools.product("ab*", repeat=N):
        if "*" not in pattern:
            continue
        a = "".join(pattern).replace("*", "a")
        b = "".join(pattern).replace("*", "b")
        if coloring[a] == coloring[b]:
            return True
    return False


def _hj_oracle(N: int) -> bool:
    words = ["".join(p) for p in itertools.product("ab", repeat=N)]
    return all(_hj_line_exists(dict(zip(words, cs)), N) for cs in itertools.product(range(2), repeat=len(words)))


def test_hj_oracle_values():
    assert not _hj_oracle(1)
    assert _hj_oracle(2)


def test_hj_threshold_is_two():
    res = threshold(instance(HJ.replace("{N}", str(1))), 2, 3)
    assert res.value == 2
    first = res.reports[0]
    assert not first.certified
    colours = {tuple(w): c for w, c in first.avoiding}
    assert colours[("<'a'>",)] != colours[("<'b'>",)]
    assert res.reports[1].certified and res.reports[2].certified


def test_hindman_pairs_threshold_frozen():
    res = threshold(instance(PAIRS.replace("{N}", str(1))), 2, 6)
    assert res.value == 5
    assert [r.certified for r in res.reports] == [False, False, False, False, True, True]
    assert res.reports[-1].method == "inclusion"


def _pairs_oracle(N: int) -> bool:
    """Every 2-colouring of nonempty subsets of [0, N) has x < y with x, y, x | y one colour."""
    subsets = [frozenset(s) for k in range(1, N + 1) for s in itertools.combinations(range(N), k)]
    pairs = [(x, y) for x in subsets for y in subsets if max(x) < min(y)]
    idx = {s: i for i, s in enumerate(subsets)}
    triples = [(idx[x], idx[y], idx[x | y]) for x, y in pairs]
    for bits in range(1 << len(subsets)):
        if not any(((bits >> a) & 1) == ((bits >> b) & 1) == ((bits >> c) & 1) for a, b, c in triples):
            return False
    return True


@pytest.mark.parametrize("N", [2, 3, 4])
def test_hindman_pairs_below_threshold_matches_oracle(N):
    assert not _pairs_oracle(N)
    assert not certify_bound(instance(PAIRS.replace("{N}", str(N))), 2).certified


def test_constraints_embed_and_single_colour():
    small, big = instance(PAIRS.replace("{N}", str(3))), instance(PAIRS.replace("{N}", str(4)))
    assert constraints_embed(small, big)
    assert len(build_constraints(small).constraints) == 5
    assert certify_bound(small, 1).certified


def test_jobs_give_identical_result():
    a = threshold(instance(PAIRS.replace("{N}", str(1))), 2, 5, jobs=1).to_json()
    b = threshold(instance(PAIRS.replace("{N}", str(1))), 2, 5, jobs=2).to_json()
    assert a["value"] == b["value"] == 5
    assert [r["certified"] for r in a["bounds"]] == [r["certified"] for r in b["bounds"]]
    assert [r.get("avoiding_coloring") for r in a["bounds"]] == [r.get("avoiding_coloring") for r in b["bounds"]]
