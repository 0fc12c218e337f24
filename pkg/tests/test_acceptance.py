"""Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.

Run with pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from _laws import check_laws  # noqa: E402
from _support import brute_combination_count, factor, instance, naive_extended, report  # noqa: E402
from conftest import CORPUS, GOLDEN, run_cli  # noqa: E402
from treeramsey import reference as ref  # noqa: E402
from treeramsey.colorings import OverrideColoring  # noqa: E402
from treeramsey.delta import GMap, box_density, furstenberg_instance, furstenberg_search, residue_scene  # noqa: E402
from treeramsey.dsl import build_instance, parse_instance  # noqa: E402
from treeramsey.errors import NoIdempotentInStage, NotIntegerValued  # noqa: E402
from treeramsey.polynomial import eval_extended, parse_poly, random_extended, validate_int_poly  # noqa: E402
from treeramsey.search import (  # noqa: E402
    SearchInstance,
    check_block_witness,
    count_combinations,
    enumerate_combinations,
    search_block_sequence,
    structured_sum,
)
from treeramsey.semigroups import verify_minimal_lift_exhaustive  # noqa: E402
from treeramsey.threshold import threshold  # noqa: E402
from treeramsey.tree_actions import (  # noqa: E402
    assignment_problems,
    equivariant_assignments,
    layered_minimal_assignment,
    minimality_problems,
    order_preserving_idempotent,
    random_action,
)
from treeramsey.trees import RootedTree, all_trees, enumerate_regressive_homs  # noqa: E402

# Pinned tolerances.
HOM_RUNTIME_S = 5.0
LIFT_RUNTIME_S = 60.0
HINDMAN_RUNTIME_S = 1.0
HJ_RUNTIME_S = 1.0
RANDOM_ACTIONS = 200
LAW_CASES = 10_000
MUTATIONS = 20
AST_CASES = 1000
AST_DEPTH = 6
DENSITY_MOD5 = Fraction(2, 5)


def _brute_homs(parents: tuple) -> set:
    """All maps nodes -> nodes, kept when regressive and adjacency-preserving."""
    n = len(parents) + 1
    par = (None,) + tuple(parents)

    def adjacent(u, v):
        return par[u] == v or par[v] == u

    out = set()
    for f in itertools.product(range(n), repeat=n):
        if any(f[t] not in ref.root_path(tuple(parents), t) for t in range(n)):
            continue
        if all(f[c] == f[par[c]] or adjacent(f[c], f[par[c]]) for c in range(1, n)):
            out.add(f)
    return out


def test_criterion_01_regressive_homs():
    t0 = time.perf_counter()
    p2 = RootedTree((0, 1))
    found = {h.values for h in enumerate_regressive_homs(p2)}
    oracle = _brute_homs((0, 1))
    pairs = missing = 0
    for tree in all_trees(6):
        homs = [h.values for h in enumerate_regressive_homs(tree)]
        closed = set(homs)
        for f in homs:
            for g in homs:
                pairs += 1
                missing += tuple(f[x] for x in g) not in closed
    dt = time.perf_counter() - t0
    ok = found == oracle and len(found) == 5 and missing == 0 and dt < HOM_RUNTIME_S
    assert report(1, "regressive homomorphisms", ok,
                  f"path count {len(found)} (27-map oracle {len(oracle)}), {pairs} compositions on trees <= 6 nodes, "
                  f"{missing} outside the set, {dt:.2f}s < {HOM_RUNTIME_S}s")


def test_criterion_02_minimal_lift():
    t0 = time.perf_counter()
    rep = verify_minimal_lift_exhaustive(3)
    dt = time.perf_counter() - t0
    ok = rep.ok and not rep.counterexamples and rep.tables == 122 and dt < LIFT_RUNTIME_S
    assert report(2, "minimal lift exhaustive", ok,
                  f"{rep.tables} associative tables of order <= 3, {rep.triples} triples, "
                  f"{len(rep.counterexamples)} counterexamples, {dt:.2f}s < {LIFT_RUNTIME_S}s")


def test_criterion_03_idempotent_assignments():
    rng = random.Random(2024)
    ok_runs = raised = failed = raised_order_preserving = 0
    for _ in range(RANDOM_ACTIONS):
        act, seed = random_action(rng, 4)
        assert act.semigroup.order <= 5
        try:
            xi = order_preserving_idempotent(act, seed)
        except NoIdempotentInStage:
            # no output at all; count it, and confirm by full scan that nothing keeps the root value
            if any(not assignment_problems(act, c) for c in equivariant_assignments(act, {0: seed[0]})):
                failed += 1
            else:
                raised += 1
                raised_order_preserving += all(e.spine.is_order_preserving() for e in act.endos)
            continue
        if assignment_problems(act, xi):
            failed += 1
        else:
            ok_runs += 1
    layered_ok = layered_bad = 0
    for _ in range(RANDOM_ACTIONS):
        act, _ = random_action(rng, 4, layered=True)
        x = layered_minimal_assignment(act)
        if assignment_problems(act, x) or minimality_problems(act, x):
            layered_bad += 1
        else:
            layered_ok += 1
    ok = ok_runs == RANDOM_ACTIONS and layered_ok == RANDOM_ACTIONS
    assert report(3, "idempotent assignments", ok,
                  f"{ok_runs}/{RANDOM_ACTIONS} outputs pass, {failed} fail; {raised} actions have no valid output "
                  f"(confirmed by scan; {raised_order_preserving} of them with only order-preserving spines); "
                  f"layered {layered_ok}/{RANDOM_ACTIONS} minimal by direct scan")


def test_criterion_04_word_algebra_laws():
    tally = check_laws(LAW_CASES, seed=0)
    fold_only = not tally.equivariance_order_preserving
    ok = not tally.homomorphism and not tally.functoriality and not tally.equivariance and bool(tally.overlap_drops)
    assert report(4, "word-algebra laws", ok,
                  f"{tally.cases} cases: homomorphism {len(tally.homomorphism)} failures, functoriality "
                  f"{len(tally.functoriality)}, component equivariance {len(tally.equivariance)} failures "
                  f"({'all with fold spines' if fold_only else 'some with order-preserving spines'}; "
                  f"{len(tally.equivariance_order_preserving)} with order-preserving spines), "
                  f"overlap drops {len(tally.overlap_drops)}")


def test_criterion_05_hindman():
    inst = instance((CORPUS / "hindman_parity.tr").read_text())
    t0 = time.perf_counter()
    res = search_block_sequence(inst)
    dt = time.perf_counter() - t0
    rep = check_block_witness(inst, res.blocks)
    sums = []
    for combo, _ in enumerate_combinations(inst):
        (w,) = structured_sum(inst, res.blocks, combo)
        if w not in sums:
            sums.append(w)
    rng = random.Random(5)
    targets = sums + [rng.choice(sums) for _ in range(MUTATIONS - len(sums))]
    rejected = 0
    for w in targets:
        mutant = OverrideColoring(inst.coloring, {w: 1 - inst.coloring(w)})
        rejected += not check_block_witness(inst, res.blocks, mutant).ok
    ok = res.found and rep.ok and dt < HINDMAN_RUNTIME_S and rejected == MUTATIONS
    assert report(5, "finitary Hindman", ok,
                  f"witness in {dt:.3f}s < {HINDMAN_RUNTIME_S}s, {rep.combinations} combinations verified, "
                  f"{rejected}/{MUTATIONS} single-colour mutations rejected ({len(sums)} distinct sums)")


def test_criterion_06_gowers():
    inst = instance((CORPUS / "gowers_fin2.tr").read_text())
    res = search_block_sequence(inst)
    rep = check_block_witness(inst, res.blocks) if res.found else None
    ok = inst.bound == 12 and res.found and rep.ok
    assert report(6, "Gowers FIN_2", ok,
                  f"status {res.status} at bound {inst.bound} (window {res.window}), "
                  f"{rep.combinations if rep else 0} combinations verified")


def _hj_has_line(colouring: dict, n: int) -> bool:
    for pattern in itertools.product("ab*", repeat=n):
        if "*" in pattern:
            s = "".join(pattern)
            if colouring[s.replace("*", "a")] == colouring[s.replace("*", "b")]:
                return True
    return False


def test_criterion_07_hales_jewett():
    inst = instance((CORPUS / "hj_line.tr").read_text())
    t0 = time.perf_counter()
    res = threshold(inst, 2, 3)
    dt = time.perf_counter() - t0
    words2 = ["".join(p) for p in itertools.product("ab", repeat=2)]
    all16 = all(_hj_has_line(dict(zip(words2, cs)), 2) for cs in itertools.product(range(2), repeat=4))
    avoid = {tuple(w)[0].strip("<>'"): c for w, c in res.reports[0].avoiding}
    avoids = not _hj_has_line(avoid, 1)
    ok = res.value == 2 and all16 and avoids and dt < HJ_RUNTIME_S
    assert report(7, "Hales-Jewett threshold", ok,
                  f"value {res.value}; oracle: all 16 colourings at 2 have a line = {all16}, "
                  f"listed colouring at 1 avoids = {avoids}; {dt:.3f}s < {HJ_RUNTIME_S}s")


def test_criterion_08_product_form():
    checked = mismatches = 0
    for parents in [(0,), (0, 1), (0, 0)]:
        for alphabet in [(), ("a",)]:
            for sched in ("identity", "homs"):
                f = factor(parents, alphabet, sched)
                for blocks in (1, 2, 3):
                    for m in (1, 2):
                        checked += 1
                        inst = SearchInstance((f,), None, blocks, 8, coords=(0,) * m)
                        mismatches += count_combinations(inst) != brute_combination_count(f, blocks, m)
    prod = instance((CORPUS / "product_parity.tr").read_text())
    same = count_combinations(prod) == brute_combination_count(factor((0,), (), "identity"), prod.blocks, 2)
    res = search_block_sequence(prod)
    rep = check_block_witness(prod, res.blocks) if res.found else None
    ok = mismatches == 0 and same and res.found and rep.ok and prod.bound == 16
    assert report(8, "product form", ok,
                  f"{checked} single-factor instances, {mismatches} count mismatches; two-factor count matches = {same}; "
                  f"witness {res.status} within bound {prod.bound}, {rep.combinations if rep else 0} combinations verified")


def test_criterion_09_polynomials():
    rng = random.Random(9)
    consts = [(a, b) for a in range(-3, 4) for b in range(-3, 4)]
    ops = {"+": lambda a, b: tuple(x + y for x, y in zip(a, b)), "max": lambda a, b: tuple(map(max, a, b))}
    agree = 0
    for _ in range(AST_CASES):
        p = random_extended(rng, rng.randint(0, AST_DEPTH), consts=consts)
        n = len(ref_vars(p))
        args = [(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(n)]
        agree += eval_extended(p, args, ops) == naive_extended(p, args)
    accepted = validate_int_poly([parse_poly("z*(z-1)/2", 1)]) is not None
    try:
        validate_int_poly([parse_poly("z/2", 1)])
        point = None
    except NotIntegerValued as e:
        point = e.point
    ok = agree == AST_CASES and accepted and point is not None
    assert report(9, "polynomials", ok,
                  f"{agree}/{AST_CASES} random ASTs agree (depth <= {AST_DEPTH}); z(z-1)/2 accepted; "
                  f"z/2 rejected at {point}")


def ref_vars(p) -> list:
    return [p.index] if hasattr(p, "index") else sum((ref_vars(getattr(p, c)) for c in ("left", "right", "sub")
                                                       if hasattr(p, c)), [])


def test_criterion_10_delta_set():
    tree = RootedTree((0,))
    scene = residue_scene(5, [0, 1], 0, 200)
    g = GMap.constant(tree, {1: (1,)})
    poly = build_instance(parse_instance((CORPUS / "delta_mod5.tr").read_text())).instance.coloring.poly
    res = furstenberg_search(scene, tree, g, poly, bound=40, m_blocks=2)
    inst = furstenberg_instance(scene, tree, g, poly, 40, 2)
    direct = failures = 0
    for combo, _ in enumerate_combinations(inst):
        (w,) = structured_sum(inst, res.blocks, combo)
        v = poly((len(w.entries),))  # every surviving entry carries weight 1
        direct += 1
        failures += not any((a[0] + v[0],) in scene.points for a in scene.points)
    density = box_density(scene, (0,), (50,))
    ok = res.found and failures == 0 and density == DENSITY_MOD5
    assert report(10, "delta set", ok,
                  f"blocks {[row[1].support for row in res.blocks[0]]}, {direct} sums swept, {failures} outside A-A; "
                  f"density on [0,50) = {density} (expected {DENSITY_MOD5})")


def _produce(tmp: Path, verb: str, name: str, k: int) -> tuple[int, Path]:
    out = tmp / f"{name}.{k}.json"
    r = run_cli(verb, CORPUS / f"{name}.tr", "--out", out)
    return r.returncode, out


def test_criterion_11_determinism(tmp_path):
    jobs = [("search", n) for n in ("hindman_parity", "gowers_fin2", "product_parity", "table_coloring")] + \
           [("delta-scan", n) for n in ("delta_mod5", "delta_evens_2d")] + [("threshold", "hj_line")]
    verified = identical = golden_match = 0
    for verb, name in jobs:
        c1, a = _produce(tmp_path, verb, name, 1)
        c2, b = _produce(tmp_path, verb, name, 2)
        identical += c1 == c2 == 0 and a.read_bytes() == b.read_bytes()
        verified += run_cli("verify", a).returncode == 0
        gold = GOLDEN / f"{name}.{'certificate' if verb == 'threshold' else 'witness'}.json"
        golden_match += a.read_bytes() == gold.read_bytes()
    n = len(jobs)
    ok = verified == identical == golden_match == n
    assert report(11, "determinism and certificates", ok,
                  f"{verified}/{n} outputs verified in a fresh process, {identical}/{n} byte-identical reruns, "
                  f"{golden_match}/{n} equal to the golden files")


if __name__ == "__main__":
    import tempfile

    from _support import ACCEPTANCE

    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                    with tempfile.TemporaryDirectory() as d:
                        fn(Path(d))
                else:
                    fn()
            except AssertionError:
                pass
    print("\n".join(ACCEPTANCE))
    sys.exit(0 if all(line.startswith("PASS") for line in ACCEPTANCE) else 1)
