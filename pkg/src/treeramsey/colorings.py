"""Colorings of words and word tuples.

Three kinds are supported: lookup tables, callables, and a small integer
expression language.  Expressions are parsed with :mod:`ast` and only a
whitelisted subset is accepted; evaluation is total (division or remainder
by zero gives 0, statistics of empty sets give -1).

Expression vocabulary, for a word ``w``:

``size``            number of entries (string length for nonlocated words)
``minpos maxpos``   least / largest occupied position
``letters vars``    number of letter / variable entries
``comp``            component node of the word (0 for the root)
``lead``            number of entries carrying the component's variable
``count(s)``        entries equal to symbol ``s`` (``'a'`` or ``$n``)
``minof(s) maxof(s)`` least / largest position holding ``s``
``min(..) max(..) abs(..)``

Product instances colour tuples; ``w0.size``, ``w1.count($1)`` and so on
address coordinates, and bare names mean coordinate 0.
"""

from __future__ import annotations

import ast
import hashlib
import json
import operator
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import ParseError, syntax_column
from .words import Letter, StringWord, Var, Word, WordContext, format_word, try_classify

_STATS = ("size", "minpos", "maxpos", "letters", "vars", "comp", "lead")
_FUNCS = ("count", "minof", "maxof")
_VAR_TOKEN = re.compile(r"\$(\d+)")


def _positions(w: Word):
    if isinstance(w, StringWord):
        return list(enumerate(w.symbols))
    return list(w.entries)


def word_stat(w: Word, name: str, tree) -> int:
    ps = _positions(w)
    if name == "size":
        return len(ps)
    if name == "minpos":
        return ps[0][0] if ps else -1
    if name == "maxpos":
        return ps[-1][0] if ps else -1
    if name == "letters":
        return sum(isinstance(s, Letter) for _, s in ps)
    if name == "vars":
        return sum(isinstance(s, Var) for _, s in ps)
    c = try_classify(w, tree)
    c = -1 if c is None else c
    if name == "comp":
        return c
    if name == "lead":
        return sum(s == Var(c) for _, s in ps) if c > 0 else 0
    raise KeyError(name)


def word_symbol_stat(w: Word, name: str, sym) -> int:
    hits = [p for p, s in _positions(w) if s == sym]
    if name == "count":
        return len(hits)
    if not hits:
        return -1
    return hits[0] if name == "minof" else hits[-1]


def _safe_floordiv(a, b):
    return 0 if b == 0 else a // b


def _safe_mod(a, b):
    return 0 if b == 0 else a % b


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.FloorDiv: _safe_floordiv, ast.Mod: _safe_mod, ast.Div: _safe_floordiv}
_CMPOPS = {ast.Eq: operator.eq, ast.NotEq: operator.ne, ast.Lt: operator.lt, ast.LtE: operator.le,
           ast.Gt: operator.gt, ast.GtE: operator.ge}


class ExprCompiler:
    def __init__(self, contexts: Sequence[WordContext], line: int = 1, col0: int = 1):
        self.contexts = list(contexts)
        self.line = line
        self.col0 = col0

    def error(self, node, expected):
        col = self.col0 + getattr(node, "col_offset", 0)
        raise ParseError(self.line, col, expected)

    def compile(self, text: str) -> Callable:
        src = _VAR_TOKEN.sub(lambda m: f"_var{m.group(1)}", text)
        try:
            tree = ast.parse(src.strip(), mode="eval")
        except SyntaxError as e:
            raise ParseError(self.line, self.col0 + syntax_column(e, src.strip()), "coloring expression") from None
        return self.node(tree.body)

    def coord(self, node) -> tuple[int, Optional[str]]:
        """(coordinate, attribute) for ``name`` or ``wK.name``."""
        if isinstance(node, ast.Name):
            return 0, node.id
        if isinstance(node, ast.Attribute) and isinstance(node.value, ast.Name):
            m = re.fullmatch(r"w(\d+)", node.value.id)
            if m:
                k = int(m.group(1))
                if k >= len(self.contexts):
                    self.error(node, f"coordinate below {len(self.contexts)}")
                return k, node.attr
        self.error(node, "statistic name")

    def symbol(self, node, k: int):
        ctx = self.contexts[k]
        if isinstance(node, ast.Constant) and isinstance(node.value, str):
            if node.value not in ctx.alphabet:
                self.error(node, "letter of the alphabet")
            return Letter(ctx.alphabet.index(node.value))
        if isinstance(node, ast.Name) and node.id.startswith("_var"):
            t = int(node.id[4:])
            if not 0 < t < ctx.tree.size:
                self.error(node, "non-root node")
            return Var(t)
        self.error(node, "symbol 'letter' or $node")

    def node(self, n) -> Callable:
        if isinstance(n, ast.Constant) and isinstance(n.value, int) and not isinstance(n.value, bool):
            v = n.value
            return lambda ws: v
        if isinstance(n, ast.BinOp) and type(n.op) in _BINOPS:
            f, a, b = _BINOPS[type(n.op)], self.node(n.left), self.node(n.right)
            return lambda ws: f(a(ws), b(ws))
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, (ast.USub, ast.UAdd, ast.Not)):
            a = self.node(n.operand)
            if isinstance(n.op, ast.USub):
                return lambda ws: -a(ws)
            if isinstance(n.op, ast.Not):
                return lambda ws: int(not a(ws))
            return a
        if isinstance(n, ast.Compare):
            parts = [self.node(n.left)] + [self.node(c) for c in n.comparators]
            ops = [_CMPOPS[type(o)] if type(o) in _CMPOPS else self.error(n, "comparison") for o in n.ops]

            def cmp(ws):
                vals = [p(ws) for p in parts]
                return int(all(op(x, y) for op, x, y in zip(ops, vals, vals[1:])))
            return cmp
        if isinstance(n, ast.BoolOp):
            parts = [self.node(v) for v in n.values]
            if isinstance(n.op, ast.And):
                return lambda ws: int(all(p(ws) for p in parts))
            return lambda ws: int(any(p(ws) for p in parts))
        if isinstance(n, ast.IfExp):
            c, a, b = self.node(n.test), self.node(n.body), self.node(n.orelse)
            return lambda ws: a(ws) if c(ws) else b(ws)
        if isinstance(n, (ast.Name, ast.Attribute)):
            k, name = self.coord(n)
            if name not in _STATS:
                self.error(n, "one of " + ", ".join(_STATS))
            tree = self.contexts[k].tree
            return lambda ws: word_stat(ws[k], name, tree)
        if isinstance(n, ast.Call) and not n.keywords:
            if isinstance(n.func, ast.Name) and n.func.id in ("min", "max", "abs"):
                args = [self.node(a) for a in n.args]
                if not args or (n.func.id == "abs" and len(args) != 1):
                    self.error(n, "arguments")
                f = {"min": min, "max": max, "abs": lambda x: abs(x)}[n.func.id]
                return lambda ws: f(*[a(ws) for a in args])
            k, name = self.coord(n.func)
            if name not in _FUNCS or len(n.args) != 1:
                self.error(n, "count(sym), minof(sym) or maxof(sym)")
            sym = self.symbol(n.args[0], k)
            return lambda ws: word_symbol_stat(ws[k], name, sym)
        self.error(n, "integer expression")


@dataclass
class ExprColoring:
    text: str
    contexts: tuple
    colors: int = 2
    _fn: Callable = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.contexts = tuple(self.contexts)
        if self._fn is None:
            self._fn = ExprCompiler(self.contexts).compile(self.text)

    def __call__(self, w) -> int:
        ws = w if isinstance(w, tuple) else (w,)
        return self._fn(ws) % self.colors

    def describe(self) -> str:
        return "expr " + self.text

    def __getstate__(self):
        return {"text": self.text, "contexts": self.contexts, "colors": self.colors}

    def __setstate__(self, st):
        self.text, self.contexts, self.colors = st["text"], st["contexts"], st["colors"]
        self._fn = ExprCompiler(self.contexts).compile(self.text)


@dataclass
class TableColoring:
    """Explicit colours for some words; every other word gets ``default``."""

    table: dict
    colors: int = 2
    default: int = 0

    def __call__(self, w) -> int:
        return self.table.get(w, self.default)

    def describe(self) -> str:
        return f"table with {len(self.table)} entries"


@dataclass
class FunctionColoring:
    fn: Callable
    name: str = "function"
    colors: int = 2

    def __call__(self, w) -> int:
        return self.fn(w)

    def describe(self) -> str:
        return self.name


class OverrideColoring:
    """A base colouring with some words recoloured."""

    def __init__(self, base, overrides: dict):
        self.base = base
        self.overrides = dict(overrides)
        self.colors = getattr(base, "colors", 2)

    def __call__(self, w) -> int:
        if w in self.overrides:
            return self.overrides[w]
        return self.base(w)

    def describe(self) -> str:
        return f"{self.base.describe()} with {len(self.overrides)} overrides"


class CachedColoring:
    def __init__(self, base):
        self.base = base
        self.colors = getattr(base, "colors", 2)
        self.cache: dict = {}

    def __call__(self, w) -> int:
        c = self.cache.get(w)
        if c is None:
            c = self.cache[w] = self.base(w)
        return c


def table_digest(table: dict, contexts) -> str:
    items = sorted(
        (json.dumps([format_word(x, contexts[i]) for i, x in enumerate(k if isinstance(k, tuple) else (k,))]), v)
        for k, v in table.items())
    return hashlib.sha256(json.dumps(items).encode()).hexdigest()
