"""Command-line interface.

Exit codes: 0 success (witness found, certificate verified, checks passed);
2 search exhausted or threshold unknown within the bound; 1 usage errors,
bad input, or a failed verification.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import ENGINE_VERSION
from .dsl import build_instance, emit_instance, parse_instance, with_overrides
from .errors import BudgetExceeded, NoIdempotentInStage, ParseError, ResolutionError, TreeRamseyError
from .search import DEFAULT_BUDGET, search_block_sequence
from .semigroups import verify_minimal_lift_exhaustive
from .threshold import threshold
from .tree_actions import (
    assignment_problems,
    equivariant_assignments,
    layered_minimal_assignment,
    minimality_problems,
    order_preserving_idempotent,
    random_action,
)
from .trees import enumerate_regressive_homs, validate_tree
from .witness import (
    dumps,
    load_document,
    search_document,
    self_contained,
    threshold_document,
    verify_document,
)

EXIT_OK, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--bound", type=int, help="search bound (maximum bound for threshold)")
    p.add_argument("--blocks", type=int, help="number of block steps")
    p.add_argument("--colors", type=int, help="number of colours")
    p.add_argument("--seed", type=int, help="seed for randomized checks (recorded in outputs)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", type=Path, help="also write the JSON document here")
    p.add_argument("--format", choices=("json", "text"), default="json")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = _Parser(prog="treeramsey", description="Block-sequence Ramsey search over tree-indexed words.")
    ap.add_argument("--version", action="version", version=ENGINE_VERSION)
    sub = ap.add_subparsers(dest="verb", parser_class=_Parser)
    sub.required = True
    p = sub.add_parser("enumerate-homs", parents=[common], help="list regressive homomorphisms of a tree")
    p.add_argument("--tree", required=True, help='parent list, e.g. "[0,1]"')
    p.add_argument("--limit", type=int, default=10, help="node limit for enumeration")
    for verb, what in (("search", "search for a witness block sequence"),
                       ("threshold", "least bound at which every colouring has a witness"),
                       ("delta-scan", "density report and delta-set block search")):
        p = sub.add_parser(verb, parents=[common], help=what)
        p.add_argument("instance", type=Path)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="candidate block budget")
    p = sub.add_parser("verify", parents=[common], help="re-check a witness or certificate file")
    p.add_argument("witness", type=Path)
    p = sub.add_parser("semigroup-verify", parents=[common], help="exhaustive and randomized idempotent checks")
    p.add_argument("--max-order", type=int, default=3)
    p.add_argument("--random", type=int, default=200, help="number of random tree actions")
    p.add_argument("--max-nodes", type=int, default=4)
    return ap


def _emit(args, doc: dict, text_lines: Sequence[str]):
    if args.out is not None:
        args.out.write_text(dumps(doc))
    if args.format == "json":
        sys.stdout.write(dumps(doc))
    else:
        sys.stdout.write("\n".join(text_lines) + "\n")


def _load_spec(args, mode: str):
    path: Path = args.instance
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    spec = parse_instance(text)
    if (mode == "delta-scan") != (spec.mode == "delta-scan"):
        raise UsageError(f"{path} declares mode {spec.mode}; use the "
                         f"{'delta-scan' if spec.mode == 'delta-scan' else 'search or threshold'} verb")
    spec = with_overrides(spec, mode=mode, bound=args.bound, blocks=args.blocks, colors=args.colors, seed=args.seed)
    spec = self_contained(spec, path.parent)
    return parse_instance(emit_instance(spec)), path


def cmd_enumerate_homs(args) -> int:
    try:
        parents = json.loads(args.tree)
    except json.JSONDecodeError:
        raise UsageError(f"--tree: not a JSON list: {args.tree!r}") from None
    if not isinstance(parents, list):
        raise UsageError("--tree: expected a list of parents")
    tree = validate_tree(parents)
    homs = enumerate_regressive_homs(tree, limit=args.limit)
    doc = {"verb": "enumerate-homs", "tree": list(tree.parents), "count": len(homs),
           "homs": [list(h.values) for h in homs], "engine": ENGINE_VERSION}
    lines = [f"tree {tree.to_text()}: {len(homs)} regressive homomorphisms"] + \
            ["  " + " ".join(map(str, h.values)) for h in homs]
    _emit(args, doc, lines)
    return EXIT_OK


def _search_lines(doc: dict) -> list[str]:
    lines = [f"{doc['kind']}: {doc['verdict']} (explored {doc['search']['explored']})"]
    if doc.get("blocks"):
        for name, rows in doc["blocks"].items():
            for n, row in enumerate(rows):
                lines.append(f"  {name} step {n}: " + "  ".join(row))
        lines.append(f"  combinations checked: {doc['coverage']['combinations']}")
    if "delta" in doc:
        for k, v in sorted(doc["delta"].items()):
            lines.append(f"  {k}: {v}")
    return lines


def cmd_search(args, mode: str = "search") -> int:
    spec, path = _load_spec(args, mode)
    built = build_instance(spec, path.parent)
    res = search_block_sequence(built.instance, args.budget)
    doc = search_document(built, res, spec.seed)
    _emit(args, doc, _search_lines(doc))
    return EXIT_OK if res.found else EXIT_UNKNOWN


def cmd_delta_scan(args) -> int:
    return cmd_search(args, "delta-scan")


def cmd_threshold(args) -> int:
    spec, path = _load_spec(args, "threshold")
    built = build_instance(spec, path.parent)
    colors = spec.colors
    res = threshold(built.instance, colors, spec.bound, jobs=max(1, args.jobs))
    doc = threshold_document(spec, res, spec.seed)
    lines = [f"threshold for {colors} colours: {res.value if res.value is not None else 'unknown'}"
             f" (searched up to {spec.bound})"]
    for r in res.reports:
        lines.append(f"  bound {r.bound}: {'certified' if r.certified else 'avoiding colouring found'}"
                     f" ({r.method}, {r.sequences} sequences, {r.constraints} constraints)")
    _emit(args, doc, lines)
    return EXIT_OK if res.value is not None else EXIT_UNKNOWN


def cmd_verify(args) -> int:
    try:
        doc = load_document(args.witness)
    except OSError as e:
        raise UsageError(f"cannot read {args.witness}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{args.witness}: not JSON ({e})") from None
    outcome = verify_document(doc)
    out = {"verb": "verify", "engine": ENGINE_VERSION, **outcome.to_json()}
    lines = [f"{outcome.kind}: {'OK' if outcome.ok else 'FAILED'}: {outcome.message}"]
    _emit(args, out, lines)
    if not outcome.ok:
        if outcome.inconclusive:
            print(f"verify: {outcome.message}", file=sys.stderr)
            return EXIT_UNKNOWN
        print(f"verify: {outcome.message}", file=sys.stderr)
        if outcome.details:
            print(json.dumps(outcome.details, sort_keys=True, indent=2), file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def _order_preserving_check(act, seed) -> str:
    """'ok', 'raised' (confirmed by a full scan) or 'failed'."""
    try:
        xi = order_preserving_idempotent(act, seed)
    except NoIdempotentInStage:
        root = seed[0]
        for cand in equivariant_assignments(act, {0: root}):
            if not assignment_problems(act, cand):
                return "failed"
        return "raised"
    return "ok" if not assignment_problems(act, xi) else "failed"


def cmd_semigroup_verify(args) -> int:
    seed = 0 if args.seed is None else args.seed
    lift = verify_minimal_lift_exhaustive(args.max_order)
    rng = random.Random(seed)
    tally = {"ok": 0, "raised": 0, "failed": 0}
    layered = {"ok": 0, "failed": 0}
    for _ in range(args.random):
        act, xi = random_action(rng, args.max_nodes)
        tally[_order_preserving_check(act, xi)] += 1
        lact, _ = random_action(rng, args.max_nodes, layered=True)
        x = layered_minimal_assignment(lact)
        good = not assignment_problems(lact, x) and not minimality_problems(lact, x)
        layered["ok" if good else "failed"] += 1
    ok = lift.ok and tally["failed"] == 0 and layered["failed"] == 0
    doc = {"verb": "semigroup-verify", "engine": ENGINE_VERSION, "seed": seed,
           "minimal_lift": lift.to_json(),
           "order_preserving": {"actions": args.random, **tally},
           "layered": {"actions": args.random, **layered},
           "verdict": "OK" if ok else "COUNTEREXAMPLE"}
    lines = [f"minimal lift: {lift.tables} tables, {lift.triples} triples, "
             f"{len(lift.counterexamples)} counterexamples ({lift.naive_failures} naive-recipe failures)",
             f"order-preserving idempotents: {tally['ok']} ok, {tally['raised']} empty stage (confirmed), "
             f"{tally['failed']} failed",
             f"layered minimal assignments: {layered['ok']} ok, {layered['failed']} failed",
             f"verdict: {doc['verdict']}"]
    _emit(args, doc, lines)
    return EXIT_OK if ok else EXIT_ERROR


COMMANDS = {
    "enumerate-homs": cmd_enumerate_homs,
    "search": cmd_search,
    "threshold": cmd_threshold,
    "delta-scan": cmd_delta_scan,
    "verify": cmd_verify,
    "semigroup-verify": cmd_semigroup_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.verb](args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_ERROR
    except (ParseError, ResolutionError) as e:
        where = getattr(args, "instance", None) or getattr(args, "witness", None) or "input"
        print(f"{where}: {e}", file=sys.stderr)
        return EXIT_ERROR
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_UNKNOWN
    except TreeRamseyError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
