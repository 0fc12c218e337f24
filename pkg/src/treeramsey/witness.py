"""Witness and certificate files.

Every file embeds the canonical instance text, so a witness can be checked
without the original instance file; coloring tables and point lists read
from files are inlined first.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from importlib.resources import files
from pathlib import Path
from typing import Optional

from . import ENGINE_VERSION
from .colorings import TableColoring
from .delta import box_density, sweep_density, verify_delta_blocks
from .dsl import (
    BuiltInstance,
    ColoringSpec,
    InstanceSpec,
    build_instance,
    build_scene,
    emit_instance,
    format_blocks,
    instance_digest,
    load_table_file,
    parse_blocks,
    parse_instance,
)
from .errors import TreeRamseyError
from .search import CheckReport, SearchResult, check_block_witness, search_block_sequence
from .threshold import ThresholdResult, certify_bound, constraints_embed
from .trees import RootedTree
from .words import WordContext, format_word, parse_word

FORMAT = "treeramsey-witness/1"


def dumps(doc: dict) -> str:
    """Deterministic JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def self_contained(spec: InstanceSpec, base_dir: Optional[Path]) -> InstanceSpec:
    """Inline file references so the canonical text carries everything."""
    if spec.coloring is not None and spec.coloring.kind == "file":
        names = {f.name: f for f in spec.factors}
        ctxs = [WordContext(RootedTree(names[n].tree), names[n].alphabet, names[n].kind) for n in spec.coords]
        p = Path(spec.coloring.path)
        p = p if p.is_absolute() or base_dir is None else base_dir / p
        table, default = load_table_file(p, ctxs)
        entries = []
        for k, c in table.items():
            ws = k if isinstance(k, tuple) else (k,)
            entries.append((tuple(format_word(w, ctx) for w, ctx in zip(ws, ctxs)), c))
        spec = replace(spec, coloring=ColoringSpec("table", entries=tuple(sorted(entries))), default_color=default)
    if spec.scene is not None and spec.scene.set_kind == "points_file":
        scene = build_scene(spec.scene, base_dir)
        spec = replace(spec, scene=replace(spec.scene, set_kind="points", set_arg=tuple(sorted(scene.points))))
    return spec


def _header(spec: InstanceSpec, kind: str, seed: Optional[int]) -> dict:
    text = emit_instance(spec)
    return {"format": FORMAT, "kind": kind, "engine": ENGINE_VERSION, "seed": seed,
            "instance": text, "instance_digest": instance_digest(spec)}


def _coverage(rep: CheckReport) -> dict:
    return {"combinations": rep.combinations, "hash": rep.coverage_hash,
            "groups": [[list(k), v] for k, v in sorted(rep.groups.items())]}


def search_document(built: BuiltInstance, res: SearchResult, seed: Optional[int]) -> dict:
    inst = built.instance
    kind = "delta" if built.spec.mode == "delta-scan" else "search"
    doc = _header(built.spec, kind, seed)
    doc["verdict"] = res.status
    doc["search"] = {"explored": res.explored, "window": res.window, "bound": res.bound}
    if not res.found:
        doc["blocks"] = None
        return doc
    doc["blocks"] = format_blocks(inst, res.blocks)
    rep = check_block_witness(inst, res.blocks)
    if not rep.ok:
        raise AssertionError(f"search returned blocks that fail the checker: {rep.violation or rep.problems}")
    doc["coverage"] = _coverage(rep)
    if kind == "delta":
        doc["delta"] = delta_summary(built, res.blocks)
    return doc


def delta_summary(built: BuiltInstance, blocks) -> dict:
    s = built.spec.scene
    scene = built.scene
    out: dict = {"scene": scene.description or s.set_kind, "window": [list(scene.lo), list(scene.hi)]}
    if s.density_box:
        d = box_density(scene, *s.density_box)
        out["density_box"] = {"lo": list(s.density_box[0]), "hi": list(s.density_box[1]), "density": str(d)}
    if s.sweep:
        sw = sweep_density(scene, s.sweep)
        out["sweep"] = {"shape": list(s.sweep), "density": str(sw.density), "box_lo": list(sw.box_lo),
                        "box_hi": list(sw.box_hi), "note": sw.note}
    if blocks is not None:
        v = verify_delta_blocks(built.instance, blocks)
        out["sums_checked"] = v.combinations
        out["failures"] = len(v.failures)
        out["edge_flags"] = v.edge_flags
    return out


def threshold_document(spec: InstanceSpec, res: ThresholdResult, seed: Optional[int]) -> dict:
    doc = _header(spec, "threshold", seed)
    doc["verdict"] = res.status
    doc["threshold"] = res.to_json()
    return doc


# ---------------------------------------------------------------------------
# Verification.

@dataclass
class VerifyOutcome:
    ok: bool
    kind: str
    message: str
    details: dict = field(default_factory=dict)
    inconclusive: bool = False

    def to_json(self) -> dict:
        return {"ok": self.ok, "kind": self.kind, "message": self.message, "details": self.details,
                "inconclusive": self.inconclusive}


def _fail(kind: str, msg: str, **details) -> VerifyOutcome:
    return VerifyOutcome(False, kind, msg, details)


def verify_document(doc: dict) -> VerifyOutcome:
    kind = doc.get("kind", "?")
    if doc.get("format") != FORMAT:
        return _fail(kind, f"unknown format {doc.get('format')!r}")
    text = doc.get("instance", "")
    try:
        spec = parse_instance(text)
    except TreeRamseyError as e:
        return _fail(kind, f"embedded instance does not parse: {e}")
    if emit_instance(spec) != text:
        return _fail(kind, "embedded instance is not in canonical form")
    if hashlib.sha256(text.encode()).hexdigest() != doc.get("instance_digest"):
        return _fail(kind, "instance digest mismatch")
    built = build_instance(spec)
    if kind in ("search", "delta"):
        return _verify_blocks(doc, built, kind)
    if kind == "threshold":
        return _verify_threshold(doc, built)
    return _fail(kind, f"unknown witness kind {kind!r}")


def _verify_blocks(doc: dict, built: BuiltInstance, kind: str) -> VerifyOutcome:
    inst = built.instance
    if doc.get("blocks") is None:
        return VerifyOutcome(False, kind, f"no blocks to verify (verdict {doc.get('verdict')})", {}, True)
    try:
        blocks = parse_blocks(inst, doc["blocks"])
    except (KeyError, ValueError, TypeError, TreeRamseyError) as e:
        return _fail(kind, f"blocks do not parse: {e}")
    rep = check_block_witness(inst, blocks)
    if rep.problems:
        return _fail(kind, "malformed blocks", problems=rep.problems)
    if not rep.ok:
        return _fail(kind, "violating combination", violation=rep.violation)
    details = {"combinations": rep.combinations, "coverage_hash": rep.coverage_hash}
    cov = doc.get("coverage")
    if cov is not None and (cov.get("hash") != rep.coverage_hash or cov.get("combinations") != rep.combinations):
        return _fail(kind, "coverage report differs from a fresh enumeration", **details)
    if kind == "delta":
        v = verify_delta_blocks(inst, blocks)
        details["sums_checked"] = v.combinations
        if not v.ok:
            return _fail(kind, "a polynomial image misses A - A", failures=v.failures[:5], **details)
    return VerifyOutcome(True, kind, "witness verified", details)


def _verify_threshold(doc: dict, built: BuiltInstance) -> VerifyOutcome:
    th = doc.get("threshold") or {}
    inst = built.instance
    r = th.get("colors")
    ctxs = inst.contexts()
    checked = []
    for b in th.get("bounds", []):
        N = b["bound"]
        big = replace(inst, bound=N)
        if b["certified"] and b.get("method") == "inclusion":
            if not constraints_embed(replace(inst, bound=N - 1), big):
                return _fail("threshold", f"constraints at bound {N - 1} do not embed at {N}")
            checked.append([N, "inclusion"])
        elif b["certified"]:
            rep = certify_bound(big, r, cross_check=False)
            if not rep.certified:
                return _fail("threshold", f"bound {N} does not re-certify")
            checked.append([N, "recertified"])
        else:
            table = {}
            for words, c in b["avoiding_coloring"]:
                ws = tuple(parse_word(w, ctx) for w, ctx in zip(words, ctxs))
                table[ws[0] if len(ws) == 1 else ws] = c
            res = search_block_sequence(replace(big, coloring=TableColoring(table, r)))
            if res.found:
                return _fail("threshold", f"listed colouring at bound {N} admits a witness",
                             blocks=format_blocks(inst, res.blocks))
            checked.append([N, "avoiding colouring confirmed"])
    value = th.get("value")
    if value is not None:
        reps = {b["bound"]: b for b in th["bounds"]}
        if not reps.get(value, {}).get("certified"):
            return _fail("threshold", f"value {value} lacks a certified bound")
        if any(not reps[n]["certified"] for n in reps if n > value):
            return _fail("threshold", "a bound above the value is not certified")
    return VerifyOutcome(True, "threshold", "certificate verified", {"checked": checked}, value is None)


def load_document(path: Path) -> dict:
    return json.loads(Path(path).read_text())


def load_schema(verb: str) -> dict:
    """JSON schema shipped for a CLI verb's ``--format json`` output."""
    return json.loads(files("treeramsey").joinpath("data", "schemas", f"{verb}.schema.json").read_text())
