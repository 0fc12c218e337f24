"""Instance description language.

A file is a sequence of lines ``key value``; ``#`` starts a comment.
Blocks are opened by ``factor NAME {``, ``scene {`` and ``coloring table {``
and closed by a line holding ``}``.  Factor keys may also be written at the
top level, which declares a single factor named ``main``.

Top level::

    mode search|verify|threshold|delta-scan
    blocks M            bound N           colors R          seed S
    coords NAME ...     freshness K ...   lengths L ...     required_color C
    coloring expr EXPRESSION | coloring file PATH | coloring table { WORD [| WORD] -> C ... }
    default_color C

Factor::

    tree [PARENTS]      alphabet a b ...  kind located|nonlocated
    endo NAME = identity | pred K | hom [VALUES] | subst {NODE: SYMBOL, ...}
    endos homs          (every regressive homomorphism, as tetris maps)
    schedule NAME ... ; NAME ... ; ...   (one group per step, the last repeats)

Scene (delta-scan)::

    window LO HI        (points as comma lists for dimension > 1)
    residues MOD R ...  | points P ... | points_file PATH | predicate EXPR
    weight NODE VECTOR  poly EXPR[; EXPR]  density_box LO HI  sweep SHAPE

The canonical form sorts keys, factors, endos and table entries and
normalizes whitespace; its sha256 is the instance digest.
"""

from __future__ import annotations

import ast
import hashlib
import json
import operator
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

from .colorings import ExprColoring, ExprCompiler, TableColoring, table_digest
from .delta import DeltaScene, GMap, furstenberg_instance, residue_scene, scene_from_points, scene_from_predicate
from .errors import ParseError, ResolutionError, TreeRamseyError, syntax_column
from .polynomial import IntPolyVec, parse_poly_vec
from .search import Factor, SearchInstance
from .trees import RegressiveHom, RootedTree, enumerate_regressive_homs, predecessor_hom, validate_tree
from .words import (
    LOCATED,
    NONLOCATED,
    SubstitutionMap,
    WordContext,
    format_word,
    identity_substitution,
    parse_word,
    substitution_from_hom,
)

MODES = ("search", "verify", "threshold", "delta-scan")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")
_SUBST_ENTRY = re.compile(r"\s*(\d+)\s*:\s*(?:'([^']*)'|\$(\d+)|(-))\s*")


@dataclass(frozen=True)
class EndoDecl:
    name: str
    kind: str  # identity | pred | hom | subst
    arg: tuple = ()
    line: int = field(default=0, compare=False)

    def to_text(self) -> str:
        if self.kind == "identity":
            return "identity"
        if self.kind == "pred":
            return f"pred {self.arg[0]}"
        if self.kind == "hom":
            return "hom [" + ",".join(map(str, self.arg)) + "]"
        return "subst {" + ", ".join(f"{t}: {s}" for t, s in self.arg) + "}"


@dataclass(frozen=True)
class FactorSpec:
    name: str
    tree: tuple
    alphabet: tuple = ()
    kind: str = LOCATED
    endos: tuple = ()
    schedule: tuple = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ColoringSpec:
    kind: str  # expr | table | file
    expr: str = ""
    entries: tuple = ()  # ((word texts...), colour)
    path: str = ""
    line: int = field(default=0, compare=False)
    col: int = field(default=1, compare=False)


@dataclass(frozen=True)
class SceneSpec:
    lo: tuple
    hi: tuple
    set_kind: str  # residues | points | points_file | predicate
    set_arg: tuple = ()
    weights: tuple = ()  # ((node, vector), ...)
    poly: str = ""
    density_box: tuple = ()
    sweep: tuple = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class InstanceSpec:
    mode: str = "search"
    blocks: int = 2
    bound: int = 8
    colors: int = 2
    seed: Optional[int] = None
    coords: tuple = ()
    freshness: tuple = ()
    lengths: tuple = ()
    required_color: Optional[int] = None
    coloring: Optional[ColoringSpec] = None
    default_color: int = 0
    factors: tuple = ()
    scene: Optional[SceneSpec] = None


# ---------------------------------------------------------------------------
# Lexing helpers.

def _strip_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == "'":
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def _norm(text: str) -> str:
    return " ".join(text.split())


class _Line:
    def __init__(self, no: int, raw: str):
        self.no = no
        body = _strip_comment(raw)
        self.indent = len(body) - len(body.lstrip())
        self.text = body.strip()
        m = re.match(r"\S+", self.text)
        self.key = m.group(0) if m else ""
        rest = self.text[len(self.key):]
        self.value = rest.strip()
        self.value_col = self.indent + len(self.key) + (len(rest) - len(rest.lstrip())) + 1

    def error(self, expected: str, found=None, offset: int = 0):
        raise ParseError(self.no, self.value_col + offset, expected, found)

    def ints(self, minimum: Optional[int] = None) -> tuple:
        out = []
        for m in re.finditer(r"\S+", self.value):
            try:
                v = int(m.group(0))
            except ValueError:
                self.error("integer", m.group(0), m.start())
            if minimum is not None and v < minimum:
                self.error(f"integer >= {minimum}", m.group(0), m.start())
            out.append(v)
        if not out:
            self.error("integer")
        return tuple(out)

    def one_int(self, minimum: Optional[int] = None) -> int:
        vals = self.ints(minimum)
        if len(vals) != 1:
            self.error("a single integer", self.value)
        return vals[0]

    def json_list(self, text: str, offset: int = 0) -> tuple:
        try:
            v = json.loads(text)
        except json.JSONDecodeError:
            self.error("list of integers like [0,1]", text, offset)
        if not isinstance(v, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
            self.error("list of integers like [0,1]", text, offset)
        return tuple(v)


def _vector(line: _Line, text: str, offset: int = 0) -> tuple:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        line.error("integer vector like 3 or 1,2", text, offset)


# ---------------------------------------------------------------------------
# Parsing.

_TOP_KEYS = {"mode", "blocks", "bound", "colors", "seed", "coords", "freshness", "lengths",
             "required_color", "coloring", "default_color", "factor", "scene"}
_FACTOR_KEYS = {"tree", "alphabet", "kind", "endo", "endos", "schedule"}
_SCENE_KEYS = {"window", "residues", "points", "points_file", "predicate", "weight", "poly",
               "density_box", "sweep"}
_REPEATABLE = {"endo", "endos", "weight", "factor"}


def _hom_name(values: tuple) -> str:
    sep = "" if all(v < 10 for v in values) else "_"
    return "h" + sep.join(map(str, values))


class _FactorBuilder:
    def __init__(self, name: str, line: int):
        self.name = name
        self.line = line
        self.tree: Optional[tuple] = None
        self.tree_line: Optional[_Line] = None
        self.alphabet: tuple = ()
        self.kind = LOCATED
        self.endos: list[EndoDecl] = []
        self.endo_homs: Optional[_Line] = None
        self.schedule: Optional[tuple] = None
        self.schedule_line: Optional[_Line] = None
        self.seen: set = set()

    def take(self, ln: _Line):
        k = ln.key
        if k in self.seen and k not in _REPEATABLE:
            raise ParseError(ln.no, ln.indent + 1, f"at most one {k!r} per factor", k)
        self.seen.add(k)
        if k == "tree":
            self.tree = ln.json_list(ln.value)
            self.tree_line = ln
        elif k == "alphabet":
            letters = tuple(ln.value.split())
            for a in letters:
                if not re.fullmatch(r"[A-Za-z0-9_]+", a):
                    ln.error("letters made of [A-Za-z0-9_]", a, ln.value.index(a))
            if len(set(letters)) != len(letters):
                ln.error("distinct letters", ln.value)
            self.alphabet = letters
        elif k == "kind":
            if ln.value not in (LOCATED, NONLOCATED):
                ln.error("located or nonlocated", ln.value)
            self.kind = ln.value
        elif k == "endo":
            self.endos.append(self._endo(ln))
        elif k == "endos":
            if ln.value != "homs":
                ln.error("'homs'", ln.value)
            self.endo_homs = ln
        elif k == "schedule":
            steps = []
            for group in ln.value.split(";"):
                names = tuple(group.split())
                if not names:
                    ln.error("endo names separated by ';' per step", ln.value)
                steps.append(names)
            self.schedule = tuple(steps)
            self.schedule_line = ln

    def _endo(self, ln: _Line) -> EndoDecl:
        m = re.match(r"(" + _NAME.pattern + r")\s*=\s*(\S+)\s*(.*)$", ln.value)
        if not m:
            ln.error("NAME = identity | pred K | hom [...] | subst {...}", ln.value)
        name, kind, rest = m.group(1), m.group(2), m.group(3).strip()
        off = m.start(3)
        if kind == "identity" and not rest:
            return EndoDecl(name, "identity", (), ln.no)
        if kind == "pred":
            try:
                k = int(rest)
            except ValueError:
                ln.error("predecessor depth", rest, off)
            if k < 0:
                ln.error("non-negative predecessor depth", rest, off)
            return EndoDecl(name, "pred", (k,), ln.no)
        if kind == "hom":
            return EndoDecl(name, "hom", ln.json_list(rest, off), ln.no)
        if kind.startswith("subst"):
            body = (kind[5:] + " " + rest).strip()
            if not (body.startswith("{") and body.endswith("}")):
                ln.error("substitution table {NODE: SYMBOL, ...}", body, m.start(2))
            entries = []
            inner = body[1:-1]
            if inner.strip():
                for part in inner.split(","):
                    em = _SUBST_ENTRY.fullmatch(part)
                    if not em:
                        ln.error("NODE: 'letter' | $NODE | -", part.strip(), m.start(2))
                    t = int(em.group(1))
                    if em.group(2) is not None:
                        entries.append((t, f"'{em.group(2)}'"))
                    elif em.group(3) is not None:
                        entries.append((t, f"${int(em.group(3))}"))
            nodes = [t for t, _ in entries]
            if len(set(nodes)) != len(nodes):
                ln.error("each node at most once", body, m.start(2))
            return EndoDecl(name, "subst", tuple(sorted(entries)), ln.no)
        ln.error("identity, pred, hom or subst", kind, m.start(2))

    def finish(self) -> FactorSpec:
        if self.tree is None:
            raise ParseError(self.line, 1, f"'tree' in factor {self.name}")
        try:
            tree = validate_tree(self.tree)
        except TreeRamseyError as e:
            self.tree_line.error("valid parent list", str(e))
        endos = list(self.endos)
        if self.endo_homs is not None:
            names = {e.name for e in endos}
            for h in enumerate_regressive_homs(tree, limit=None):
                nm = _hom_name(h.values)
                if nm not in names:
                    endos.append(EndoDecl(nm, "hom", tuple(h.values), self.endo_homs.no))
        if not endos:
            endos = [EndoDecl("id", "identity", (), self.line)]
        names = [e.name for e in endos]
        for e in endos:
            if names.count(e.name) > 1:
                raise ParseError(e.line, 1, "distinct endo names", e.name)
        schedule = self.schedule if self.schedule is not None else (tuple(names),)
        for step in schedule:
            for nm in step:
                if nm not in names:
                    raise ResolutionError(nm, self.schedule_line.no if self.schedule_line else self.line)
        return FactorSpec(self.name, tuple(self.tree), self.alphabet, self.kind,
                          tuple(sorted(endos, key=lambda e: e.name)), schedule, self.line)


def parse_instance(text: str) -> InstanceSpec:
    lines = [_Line(i + 1, raw) for i, raw in enumerate(text.splitlines())]
    top: dict = {}
    factors: dict[str, _FactorBuilder] = {}
    implicit: Optional[_FactorBuilder] = None
    scene_lines: Optional[list] = None
    scene_open: Optional[_Line] = None
    coloring: Optional[ColoringSpec] = None
    coloring_line: Optional[_Line] = None
    i = 0

    def block_body(start: int, opener: _Line) -> tuple[list, int]:
        j = start
        body = []
        while j < len(lines):
            if lines[j].text == "}":
                return body, j + 1
            if lines[j].text.endswith("{"):
                raise ParseError(lines[j].no, lines[j].indent + 1, "'}' (blocks do not nest)", lines[j].text)
            if lines[j].text:
                body.append(lines[j])
            j += 1
        raise ParseError(opener.no, opener.indent + 1, "matching '}'")

    while i < len(lines):
        ln = lines[i]
        i += 1
        if not ln.text:
            continue
        k = ln.key
        if k == "}":
            raise ParseError(ln.no, ln.indent + 1, "a key", "}")
        if k in _FACTOR_KEYS:
            if implicit is None:
                if "main" in factors:
                    raise ParseError(ln.no, ln.indent + 1, "key inside the factor block", k)
                implicit = factors["main"] = _FactorBuilder("main", ln.no)
            implicit.take(ln)
            continue
        if k not in _TOP_KEYS:
            expected = "one of " + ", ".join(sorted(_TOP_KEYS | _FACTOR_KEYS))
            raise ParseError(ln.no, ln.indent + 1, expected, k)
        if k in top and k not in _REPEATABLE:
            raise ParseError(ln.no, ln.indent + 1, f"{k!r} at most once", k)
        top[k] = ln
        if k == "factor":
            m = re.fullmatch(r"(" + _NAME.pattern + r")\s*\{", ln.value)
            if not m:
                ln.error("factor NAME {", ln.value)
            name = m.group(1)
            if name in factors:
                ln.error("a new factor name", name)
            fb = factors[name] = _FactorBuilder(name, ln.no)
            body, i = block_body(i, ln)
            for b in body:
                if b.key not in _FACTOR_KEYS:
                    raise ParseError(b.no, b.indent + 1, "one of " + ", ".join(sorted(_FACTOR_KEYS)), b.key)
                fb.take(b)
        elif k == "scene":
            if ln.value != "{":
                ln.error("scene {", ln.value)
            scene_lines, i = block_body(i, ln)
            scene_open = ln
        elif k == "coloring":
            coloring_line = ln
            kind, _, rest = ln.value.partition(" ")
            rest_col = ln.value_col + len(kind) + 1 + (len(rest) - len(rest.lstrip()))
            rest = rest.strip()
            if kind == "expr":
                if not rest:
                    ln.error("expression")
                coloring = ColoringSpec("expr", expr=_norm(rest), line=ln.no, col=rest_col)
            elif kind == "file":
                if not rest:
                    ln.error("file path")
                coloring = ColoringSpec("file", path=rest, line=ln.no, col=rest_col)
            elif kind == "table":
                if rest != "{":
                    ln.error("coloring table {", ln.value)
                body, i = block_body(i, ln)
                entries = []
                for b in body:
                    lhs, arrow, rhs = b.text.rpartition("->")
                    if not arrow:
                        raise ParseError(b.no, b.indent + 1, "WORD [| WORD] -> COLOR", b.text)
                    try:
                        c = int(rhs)
                    except ValueError:
                        raise ParseError(b.no, b.indent + len(lhs) + 3, "colour", rhs.strip()) from None
                    entries.append((tuple(_norm(w) for w in lhs.split("|")), c, b.no))
                coloring = ColoringSpec("table", entries=tuple(sorted((w, c) for w, c, _ in entries)),
                                        line=ln.no, col=rest_col)
                coloring_line = ln
                _check_duplicate_entries(entries)
            else:
                ln.error("expr, table or file", kind)

    if not factors:
        raise ParseError(len(lines) + 1 if lines else 1, 1, "a factor ('tree' key or factor block)")
    fspecs = tuple(sorted((fb.finish() for fb in factors.values()), key=lambda f: f.name))

    def get(key, conv, default):
        ln = top.get(key)
        return default if ln is None else conv(ln)

    mode = get("mode", lambda ln: ln.value if ln.value in MODES else ln.error("one of " + ", ".join(MODES), ln.value),
               "search")
    coords_ln = top.get("coords")
    if coords_ln is not None:
        coords = tuple(coords_ln.value.split())
        if not coords:
            coords_ln.error("factor names")
        for nm in coords:
            if nm not in factors:
                raise ResolutionError(nm, coords_ln.no)
    else:
        coords = tuple(f.name for f in sorted(factors.values(), key=lambda f: f.line))
    spec = InstanceSpec(
        mode=mode,
        blocks=get("blocks", lambda ln: ln.one_int(1), 2),
        bound=get("bound", lambda ln: ln.one_int(1), 8),
        colors=get("colors", lambda ln: ln.one_int(1), 2),
        seed=get("seed", lambda ln: ln.one_int(0), None),
        coords=coords,
        freshness=get("freshness", lambda ln: ln.ints(0), ()),
        lengths=get("lengths", lambda ln: ln.ints(1), ()),
        required_color=get("required_color", lambda ln: ln.one_int(0), None),
        coloring=coloring,
        default_color=get("default_color", lambda ln: ln.one_int(0), 0),
        factors=fspecs,
        scene=_parse_scene(scene_lines, scene_open) if scene_lines is not None else None,
    )
    _check_spec(spec, coloring_line, top)
    return spec


def _check_duplicate_entries(entries):
    seen = {}
    for w, c, no in entries:
        if w in seen:
            raise ParseError(no, 1, "each word at most once in a table", " | ".join(w))
        seen[w] = c


def _parse_scene(body: list, opener: _Line) -> SceneSpec:
    vals: dict = {}
    weights = []
    for ln in body:
        if ln.key not in _SCENE_KEYS:
            raise ParseError(ln.no, ln.indent + 1, "one of " + ", ".join(sorted(_SCENE_KEYS)), ln.key)
        if ln.key == "weight":
            parts = ln.value.split()
            if len(parts) != 2:
                ln.error("NODE VECTOR", ln.value)
            try:
                node = int(parts[0])
            except ValueError:
                ln.error("node", parts[0])
            weights.append((node, _vector(ln, parts[1], ln.value.index(parts[1], len(parts[0])))))
            continue
        if ln.key in vals:
            raise ParseError(ln.no, ln.indent + 1, f"{ln.key!r} at most once", ln.key)
        vals[ln.key] = ln
    if "window" not in vals:
        raise ParseError(opener.no, 1, "'window' in scene")
    w = vals["window"]
    parts = w.value.split()
    if len(parts) != 2:
        w.error("LO HI", w.value)
    lo, hi = _vector(w, parts[0]), _vector(w, parts[1], w.value.index(parts[1], len(parts[0])))
    if len(lo) != len(hi):
        w.error("corners of equal dimension", w.value)
    if any(b <= a for a, b in zip(lo, hi)):
        w.error("nonempty window", w.value)
    kinds = [k for k in ("residues", "points", "points_file", "predicate") if k in vals]
    if len(kinds) != 1:
        raise ParseError(opener.no, 1, "exactly one of residues, points, points_file, predicate",
                         ", ".join(kinds) or None)
    kind = kinds[0]
    ln = vals[kind]
    if kind == "residues":
        nums = ln.ints()
        if len(nums) < 2 or nums[0] < 1:
            ln.error("MODULUS RESIDUE ...", ln.value)
        if len(lo) != 1:
            ln.error("a one-dimensional window for residues")
        arg = (nums[0],) + tuple(sorted({r % nums[0] for r in nums[1:]}))
    elif kind == "points":
        pts = []
        for m in re.finditer(r"\S+", ln.value):
            p = _vector(ln, m.group(0), m.start())
            if len(p) != len(lo):
                ln.error(f"points of dimension {len(lo)}", m.group(0), m.start())
            pts.append(p)
        arg = tuple(sorted(set(pts)))
    elif kind == "points_file":
        arg = (ln.value,)
    else:
        compile_predicate(ln.value, len(lo), ln.no, ln.value_col)
        arg = (_norm(ln.value),)
    poly = ""
    if "poly" in vals:
        poly = "; ".join(_norm(p) for p in vals["poly"].value.split(";"))
    box = ()
    if "density_box" in vals:
        b = vals["density_box"]
        bp = b.value.split()
        if len(bp) != 2:
            b.error("LO HI", b.value)
        box = (_vector(b, bp[0]), _vector(b, bp[1], b.value.index(bp[1], len(bp[0]))))
    sweep = ()
    if "sweep" in vals:
        sweep = _vector(vals["sweep"], vals["sweep"].value)
    nodes = [t for t, _ in weights]
    if len(set(nodes)) != len(nodes):
        raise ParseError(opener.no, 1, "each node weighted at most once")
    return SceneSpec(lo, hi, kind, arg, tuple(sorted(weights)), poly, box, sweep, opener.no)


def _check_spec(spec: InstanceSpec, coloring_line: Optional[_Line], top: dict):
    names = {f.name: f for f in spec.factors}
    ctxs = []
    for nm in spec.coords:
        f = names[nm]
        ctxs.append(WordContext(RootedTree(f.tree), f.alphabet, f.kind))
    for f in spec.factors:
        _build_schedule(f)
    if spec.mode == "delta-scan":
        if spec.scene is None:
            raise ParseError(_last_line(top), 1, "a scene block for delta-scan")
        if len(spec.coords) != 1:
            raise ParseError(top["coords"].no if "coords" in top else 1, 1, "a single coordinate for delta-scan")
        f = names[spec.coords[0]]
        if f.kind != LOCATED or f.alphabet:
            raise ParseError(f.line, 1, "a located, letter-free factor for delta-scan")
        for t, _ in spec.scene.weights:
            if not 0 < t < len(f.tree) + 1:
                raise ParseError(spec.scene.line, 1, "weights on non-root nodes", t)
        dims = {len(v) for _, v in spec.scene.weights}
        if len(dims) > 1:
            raise ParseError(spec.scene.line, 1, "weight vectors of one dimension")
        if spec.scene.poly:
            dim = dims.pop() if dims else 1
            parse_poly_vec(spec.scene.poly, dim, spec.scene.line)
        if spec.coloring is not None:
            raise ParseError(spec.coloring.line, 1, "no coloring in delta-scan (the scene colours sums)")
        return
    if spec.coloring is None:
        raise ParseError(_last_line(top), 1, "a coloring")
    c = spec.coloring
    if c.kind == "expr":
        ExprCompiler(ctxs, c.line, c.col).compile(c.expr)
    elif c.kind == "table":
        for words, col in c.entries:
            if len(words) != len(ctxs):
                raise ParseError(c.line, 1, f"{len(ctxs)} words per table entry", " | ".join(words))
            for w, ctx in zip(words, ctxs):
                try:
                    parse_word(w, ctx)
                except (ValueError, TreeRamseyError) as e:
                    raise ParseError(c.line, 1, "word literal", f"{w}: {e}") from None
            if not 0 <= col < spec.colors:
                raise ParseError(c.line, 1, f"colour below {spec.colors}", col)


def _last_line(top: dict) -> int:
    return max((ln.no for ln in top.values()), default=1)


def _build_schedule(f: FactorSpec) -> tuple:
    tree = RootedTree(f.tree)
    ctx = WordContext(tree, f.alphabet, f.kind)
    built = {}
    for e in f.endos:
        try:
            built[e.name] = _build_endo(ctx, e)
        except TreeRamseyError as err:
            raise ParseError(e.line, 1, f"endomorphism valid for factor {f.name}", str(err)) from None
    return tuple(tuple(built[nm] for nm in step) for step in f.schedule)


def _build_endo(ctx: WordContext, e: EndoDecl) -> SubstitutionMap:
    tree = ctx.tree
    if e.kind == "identity":
        return identity_substitution(ctx, e.name)
    if e.kind == "pred":
        return substitution_from_hom(ctx, predecessor_hom(tree, e.arg[0]), e.name)
    if e.kind == "hom":
        return substitution_from_hom(ctx, RegressiveHom(tree, e.arg), e.name)
    table = []
    for t, s in e.arg:
        sym = parse_word(f"[0:{s}]", WordContext(tree, ctx.alphabet)).entries[0][1]
        table.append((t, sym))
    return SubstitutionMap(ctx, tuple(table), e.name)


# ---------------------------------------------------------------------------
# Canonical emit.

def emit_instance(spec: InstanceSpec) -> str:
    out = [f"blocks {spec.blocks}", f"bound {spec.bound}"]
    c = spec.coloring
    if c is not None:
        if c.kind == "expr":
            out.append(f"coloring expr {c.expr}")
        elif c.kind == "file":
            out.append(f"coloring file {c.path}")
        else:
            out.append("coloring table {")
            out += [f"  {' | '.join(w)} -> {col}" for w, col in c.entries]
            out.append("}")
    out.append(f"colors {spec.colors}")
    out.append("coords " + " ".join(spec.coords))
    if c is not None and c.kind != "expr":
        out.append(f"default_color {spec.default_color}")
    if spec.freshness:
        out.append("freshness " + " ".join(map(str, spec.freshness)))
    if spec.lengths:
        out.append("lengths " + " ".join(map(str, spec.lengths)))
    out.append(f"mode {spec.mode}")
    if spec.required_color is not None:
        out.append(f"required_color {spec.required_color}")
    if spec.seed is not None:
        out.append(f"seed {spec.seed}")
    for f in spec.factors:
        out.append(f"factor {f.name} {{")
        if f.alphabet:
            out.append("  alphabet " + " ".join(f.alphabet))
        out += [f"  endo {e.name} = {e.to_text()}" for e in f.endos]
        out.append(f"  kind {f.kind}")
        out.append("  schedule " + " ; ".join(" ".join(step) for step in f.schedule))
        out.append("  tree [" + ",".join(map(str, f.tree)) + "]")
        out.append("}")
    s = spec.scene
    if s is not None:
        vec = lambda v: ",".join(map(str, v))
        out.append("scene {")
        if s.density_box:
            out.append(f"  density_box {vec(s.density_box[0])} {vec(s.density_box[1])}")
        if s.set_kind == "points":
            out.append("  points " + " ".join(vec(p) for p in s.set_arg))
        elif s.set_kind == "points_file":
            out.append(f"  points_file {s.set_arg[0]}")
        elif s.set_kind == "predicate":
            out.append(f"  predicate {s.set_arg[0]}")
        if s.poly:
            out.append(f"  poly {s.poly}")
        if s.set_kind == "residues":
            out.append("  residues " + " ".join(map(str, s.set_arg)))
        if s.sweep:
            out.append(f"  sweep {vec(s.sweep)}")
        out += [f"  weight {t} {vec(v)}" for t, v in s.weights]
        out.append(f"  window {vec(s.lo)} {vec(s.hi)}")
        out.append("}")
    return "\n".join(out) + "\n"


def instance_digest(spec: InstanceSpec) -> str:
    return hashlib.sha256(emit_instance(spec).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Scene predicates: integer arithmetic and comparisons in x (or x0, x1, ...).

_PBIN = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
         ast.FloorDiv: lambda a, b: 0 if b == 0 else a // b, ast.Mod: lambda a, b: 0 if b == 0 else a % b}
_PCMP = {ast.Eq: operator.eq, ast.NotEq: operator.ne, ast.Lt: operator.lt, ast.LtE: operator.le,
         ast.Gt: operator.gt, ast.GtE: operator.ge}


def compile_predicate(text: str, dim: int, line: int = 1, col0: int = 1) -> Callable[[tuple], bool]:
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as e:
        raise ParseError(line, col0 + syntax_column(e, text.strip()), "predicate expression") from None

    def err(n, what):
        raise ParseError(line, col0 + getattr(n, "col_offset", 0), what)

    def build(n):
        if isinstance(n, ast.Constant) and isinstance(n.value, int):
            v = int(n.value)
            return lambda x: v
        if isinstance(n, ast.Name):
            if n.id == "x" and dim == 1:
                return lambda x: x[0]
            m = re.fullmatch(r"x(\d+)", n.id)
            if m and int(m.group(1)) < dim:
                k = int(m.group(1))
                return lambda x: x[k]
            err(n, f"coordinate x0..x{dim - 1}")
        if isinstance(n, ast.BinOp) and type(n.op) in _PBIN:
            f, a, b = _PBIN[type(n.op)], build(n.left), build(n.right)
            return lambda x: f(a(x), b(x))
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, (ast.USub, ast.Not)):
            a = build(n.operand)
            return (lambda x: -a(x)) if isinstance(n.op, ast.USub) else (lambda x: int(not a(x)))
        if isinstance(n, ast.Compare) and all(type(o) in _PCMP for o in n.ops):
            parts = [build(n.left)] + [build(c) for c in n.comparators]
            ops = [_PCMP[type(o)] for o in n.ops]
            return lambda x: int(all(op(p(x), q(x)) for op, p, q in zip(ops, parts, parts[1:])))
        if isinstance(n, ast.BoolOp):
            parts = [build(v) for v in n.values]
            if isinstance(n.op, ast.And):
                return lambda x: int(all(p(x) for p in parts))
            return lambda x: int(any(p(x) for p in parts))
        if isinstance(n, ast.Call) and isinstance(n.func, ast.Name) and n.func.id == "abs" and len(n.args) == 1:
            a = build(n.args[0])
            return lambda x: abs(a(x))
        err(n, "integer predicate expression")

    fn = build(tree.body)
    return lambda x: bool(fn(x))


# ---------------------------------------------------------------------------
# Building runnable objects.

@dataclass
class BuiltInstance:
    spec: InstanceSpec
    instance: SearchInstance
    scene: Optional[DeltaScene] = None
    coloring_digest: Optional[str] = None


def _resolve(base_dir: Optional[Path], path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() or base_dir is None else base_dir / p


def load_table_file(path: Path, contexts) -> tuple[dict, int]:
    """JSON file ``{"default": C, "entries": [[[WORD, ...], C], ...]}``."""
    data = json.loads(path.read_text())
    table = {}
    for words, c in data["entries"]:
        ws = tuple(parse_word(w, ctx) for w, ctx in zip(words, contexts))
        table[ws[0] if len(ws) == 1 else ws] = int(c)
    return table, int(data.get("default", 0))


def build_scene(s: SceneSpec, base_dir: Optional[Path] = None) -> DeltaScene:
    if s.set_kind == "residues":
        return residue_scene(s.set_arg[0], s.set_arg[1:], s.lo[0], s.hi[0])
    if s.set_kind == "points":
        return scene_from_points(s.set_arg, s.lo, s.hi)
    if s.set_kind == "points_file":
        pts = []
        for raw in _resolve(base_dir, s.set_arg[0]).read_text().splitlines():
            raw = raw.split("#")[0].strip()
            if raw:
                pts.append(tuple(int(x) for x in raw.replace(",", " ").split()))
        return scene_from_points(pts, s.lo, s.hi)
    pred = compile_predicate(s.set_arg[0], len(s.lo))
    return scene_from_predicate(pred, s.lo, s.hi, s.set_arg[0])


def build_instance(spec: InstanceSpec, base_dir: Optional[Path] = None) -> BuiltInstance:
    index = {f.name: k for k, f in enumerate(spec.factors)}
    factors = []
    for f in spec.factors:
        ctx = WordContext(RootedTree(f.tree), f.alphabet, f.kind)
        factors.append(Factor(ctx, _build_schedule(f), f.name))
    coords = tuple(index[nm] for nm in spec.coords)
    ctxs = tuple(factors[i].context for i in coords)
    if spec.mode == "delta-scan":
        s = spec.scene
        scene = build_scene(s, base_dir)
        f = factors[coords[0]]
        dim = len(s.weights[0][1]) if s.weights else 1
        gmap = GMap.constant(f.tree, dict(s.weights), dim)
        poly: Optional[IntPolyVec] = parse_poly_vec(s.poly, dim) if s.poly else None
        inst = furstenberg_instance(scene, f.tree, gmap, poly, spec.bound, spec.blocks, f.schedule)
        return BuiltInstance(spec, inst, scene)
    c = spec.coloring
    digest = None
    if c.kind == "expr":
        col = ExprColoring(c.expr, ctxs, spec.colors)
    elif c.kind == "table":
        table = {}
        for words, v in c.entries:
            ws = tuple(parse_word(w, ctx) for w, ctx in zip(words, ctxs))
            table[ws[0] if len(ws) == 1 else ws] = v
        col = TableColoring(table, spec.colors, spec.default_color)
    else:
        table, default = load_table_file(_resolve(base_dir, c.path), ctxs)
        col = TableColoring(table, spec.colors, default)
        digest = table_digest(table, ctxs)
    inst = SearchInstance(tuple(factors), col, spec.blocks, spec.bound, coords, spec.freshness, spec.lengths,
                          spec.colors, spec.required_color)
    return BuiltInstance(spec, inst, None, digest)


def with_overrides(spec: InstanceSpec, **kw) -> InstanceSpec:
    return replace(spec, **{k: v for k, v in kw.items() if v is not None})


def format_blocks(inst: SearchInstance, blocks) -> dict:
    out = {}
    for i in inst.used_factors():
        f = inst.factors[i]
        out[f.name] = [[format_word(w, f.context) for w in row] for row in blocks[i]]
    return out


def parse_blocks(inst: SearchInstance, data: dict):
    out = []
    for i, f in enumerate(inst.factors):
        if i not in inst.used_factors():
            out.append(())
            continue
        rows = data[f.name]
        out.append(tuple(tuple(parse_word(w, f.context) for w in row) for row in rows))
    return tuple(out)
