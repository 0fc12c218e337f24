"""Tree-indexed words, substitution maps and tetris operations.

A located word is a finite partial function from positions to symbols; a
symbol is either a letter of the alphabet or a variable naming a non-root
node of the tree.  A nonlocated word is a plain string of symbols.  The
component of a word is the least node of its variable set, which must be a
chain; letter-only words sit at the root.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

from .errors import AlphabetMismatch, DomainsOverlap, InvalidSubstitution, ModeMismatch, NotAChain, TreeMismatch
from .trees import RegressiveHom, RootedTree, classify_node_set, is_regressive_hom

LOCATED = "located"
NONLOCATED = "nonlocated"


@dataclass(frozen=True, order=True)
class Letter:
    index: int


@dataclass(frozen=True, order=True)
class Var:
    node: int


Symbol = Union[Letter, Var]


def symbol_key(s: Symbol) -> tuple[int, int]:
    """Letters before variables, each in index order."""
    return (0, s.index) if isinstance(s, Letter) else (1, s.node)


@dataclass(frozen=True)
class WordContext:
    tree: RootedTree
    alphabet: tuple[str, ...] = ()
    kind: str = LOCATED

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        if self.kind not in (LOCATED, NONLOCATED):
            raise ValueError(f"unknown word kind {self.kind!r}")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise AlphabetMismatch("repeated letter in alphabet")

    def letters(self) -> list[Letter]:
        return [Letter(i) for i in range(len(self.alphabet))]

    def variables(self) -> list[Var]:
        return [Var(t) for t in range(1, self.tree.size)]

    def symbols(self) -> list[Symbol]:
        return self.letters() + self.variables()

    def check_symbol(self, s: Symbol):
        if isinstance(s, Letter):
            if not 0 <= s.index < len(self.alphabet):
                raise AlphabetMismatch(f"letter {s.index} outside alphabet of size {len(self.alphabet)}")
        elif isinstance(s, Var):
            if not 0 < s.node < self.tree.size:
                raise TreeMismatch(f"variable {s.node} is not a non-root node of {self.tree}")
        else:
            raise TypeError(f"not a symbol: {s!r}")

    def letter(self, name: str) -> Letter:
        try:
            return Letter(self.alphabet.index(name))
        except ValueError:
            raise AlphabetMismatch(f"letter {name!r} not in alphabet") from None


@dataclass(frozen=True)
class TreeWord:
    """Located word: sorted (position, symbol) pairs with distinct positions."""

    entries: tuple[tuple[int, Symbol], ...] = ()

    @staticmethod
    def of(mapping) -> "TreeWord":
        items = sorted(dict(mapping).items())
        for p, _ in items:
            if p < 0:
                raise ValueError("positions must be non-negative")
        return TreeWord(tuple(items))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.entries)

    def symbols(self) -> tuple[Symbol, ...]:
        return tuple(s for _, s in self.entries)

    def variable_nodes(self) -> set[int]:
        return {s.node for _, s in self.entries if isinstance(s, Var)}

    def as_dict(self) -> dict:
        return dict(self.entries)

    def __len__(self):
        return len(self.entries)

    def __bool__(self):
        return bool(self.entries)


@dataclass(frozen=True)
class StringWord:
    symbols: tuple[Symbol, ...] = ()

    def variable_nodes(self) -> set[int]:
        return {s.node for s in self.symbols if isinstance(s, Var)}

    def __len__(self):
        return len(self.symbols)

    def __bool__(self):
        return bool(self.symbols)


Word = Union[TreeWord, StringWord]


def word_sum(b0: TreeWord, b1: TreeWord) -> TreeWord:
    d0 = set(b0.support)
    if any(p in d0 for p in b1.support):
        raise DomainsOverlap(f"supports {b0.support} and {b1.support} meet")
    return TreeWord(tuple(sorted(b0.entries + b1.entries)))


def concat(w0: StringWord, w1: StringWord) -> StringWord:
    return StringWord(w0.symbols + w1.symbols)


def add_words(w0: Word, w1: Word) -> Word:
    if isinstance(w0, StringWord):
        return concat(w0, w1)
    return word_sum(w0, w1)


def empty_word(ctx: WordContext) -> Word:
    return StringWord() if ctx.kind == NONLOCATED else TreeWord()


def classify(word: Word, tree: RootedTree) -> int:
    """Component of ``word``: least node of its variable chain, or the root."""
    c = classify_node_set(tree, word.variable_nodes())
    if not c.is_chain:
        raise NotAChain(f"variables {sorted(word.variable_nodes())} are not a chain")
    return 0 if c.least is None else c.least


def try_classify(word: Word, tree: RootedTree) -> Optional[int]:
    c = classify_node_set(tree, word.variable_nodes())
    if not c.is_chain:
        return None
    return 0 if c.least is None else c.least


def check_word(word: Word, ctx: WordContext):
    syms = word.symbols if isinstance(word, StringWord) else word.symbols()
    if isinstance(word, StringWord) != (ctx.kind == NONLOCATED):
        raise ModeMismatch(f"{type(word).__name__} used in a {ctx.kind} context")
    for s in syms:
        ctx.check_symbol(s)


@dataclass(frozen=True)
class SubstitutionMap:
    """Letters are fixed; each variable goes to a symbol or (located only) nowhere."""

    context: WordContext
    mapping: tuple[tuple[int, Symbol], ...]
    name: str = ""

    def __post_init__(self):
        items = tuple(sorted(dict(self.mapping).items()))
        object.__setattr__(self, "mapping", items)
        ctx = self.context
        for t, s in items:
            if not 0 < t < ctx.tree.size:
                raise TreeMismatch(f"substitution defined on {t}, not a non-root node")
            ctx.check_symbol(s)
        if ctx.kind == NONLOCATED and len(items) != ctx.tree.size - 1:
            raise InvalidSubstitution("nonlocated substitutions must be total on variables")
        if not is_regressive_hom(ctx.tree, self.spine_values()):
            raise InvalidSubstitution(f"spine {list(self.spine_values())} is not a regressive homomorphism")

    @property
    def mode(self) -> str:
        return self.context.kind

    def spine_values(self) -> tuple[int, ...]:
        m = dict(self.mapping)
        out = [0]
        for t in range(1, self.context.tree.size):
            s = m.get(t)
            out.append(s.node if isinstance(s, Var) else 0)
        return tuple(out)

    @property
    def spine(self) -> RegressiveHom:
        return RegressiveHom(self.context.tree, self.spine_values())

    def image(self, s: Symbol) -> Optional[Symbol]:
        if isinstance(s, Letter):
            return s
        return dict(self.mapping).get(s.node)

    def table(self) -> dict:
        return dict(self.mapping)

    def drops_symbols(self) -> bool:
        return len(self.mapping) < self.context.tree.size - 1

    def is_identity(self) -> bool:
        return all(s == Var(t) for t, s in self.mapping) and not self.drops_symbols()


def identity_substitution(ctx: WordContext, name: str = "id") -> SubstitutionMap:
    return SubstitutionMap(ctx, tuple((t, Var(t)) for t in range(1, ctx.tree.size)), name)


def substitution_from_hom(ctx: WordContext, f: RegressiveHom, name: str = "") -> SubstitutionMap:
    """Tetris map of ``f``: variable t goes to f(t), and is erased when f(t) is the root."""
    if f.tree != ctx.tree:
        raise TreeMismatch("homomorphism lives on another tree")
    if ctx.kind == NONLOCATED and any(f(t) == 0 for t in range(1, ctx.tree.size)):
        raise ModeMismatch("tetris maps that erase variables are located-only")
    return SubstitutionMap(ctx, tuple((t, Var(f(t))) for t in range(1, ctx.tree.size) if f(t) != 0), name)


def compose_substitutions(a: SubstitutionMap, b: SubstitutionMap) -> SubstitutionMap:
    """``a`` after ``b``."""
    if a.context != b.context:
        raise TreeMismatch("substitutions live in different contexts")
    out = []
    for t, s in b.mapping:
        img = a.image(s)
        if img is not None:
            out.append((t, img))
    return SubstitutionMap(a.context, tuple(out), f"{a.name}.{b.name}" if a.name and b.name else "")


def substitution_apply(sigma: SubstitutionMap, word: Word) -> Word:
    """Apply ``sigma`` symbol by symbol, keeping positions whose symbol it defines."""
    if isinstance(word, StringWord):
        return substitution_apply_nonlocated(sigma, word)
    ctx = sigma.context
    m = dict(sigma.mapping)
    nl = len(ctx.alphabet)
    out = []
    for p, s in word.entries:
        if isinstance(s, Letter):
            if s.index >= nl:
                raise AlphabetMismatch(f"letter {s.index} outside alphabet")
            out.append((p, s))
        else:
            if not 0 < s.node < ctx.tree.size:
                raise TreeMismatch(f"variable {s.node} not in {ctx.tree}")
            img = m.get(s.node)
            if img is not None:
                out.append((p, img))
    return TreeWord(tuple(out))


def substitution_apply_nonlocated(sigma: SubstitutionMap, word: StringWord) -> StringWord:
    if sigma.mode != NONLOCATED:
        raise ModeMismatch("located substitution applied to a nonlocated word")
    m = dict(sigma.mapping)
    out = []
    for s in word.symbols:
        if isinstance(s, Letter):
            if s.index >= len(sigma.context.alphabet):
                raise AlphabetMismatch(f"letter {s.index} outside alphabet")
            out.append(s)
        else:
            if not 0 < s.node < sigma.context.tree.size:
                raise TreeMismatch(f"variable {s.node} not in {sigma.context.tree}")
            out.append(m[s.node])
    return StringWord(tuple(out))


def tetris_apply(f: RegressiveHom, word: TreeWord) -> TreeWord:
    """Keep positions whose image node is not the root; relabel them by ``f``."""
    out = []
    for p, s in word.entries:
        if isinstance(s, Letter):
            out.append((p, s))
        elif f(s.node) != 0:
            out.append((p, Var(f(s.node))))
    return TreeWord(tuple(out))


def adequacy_window(ctx: WordContext, avoid: Iterable[TreeWord], bound: int,
                    component: Optional[int] = None) -> Iterator[TreeWord]:
    """Words supported in [0, bound) and disjoint from every word in ``avoid``.

    Words are produced by support size, then lexicographically.  Only words
    with a well-defined component are produced; ``component`` restricts them
    further.
    """
    used = set()
    for w in avoid:
        used.update(w.support)
    free = [p for p in range(bound) if p not in used]
    syms = sorted(ctx.symbols(), key=symbol_key)
    for k in range(len(free) + 1):
        for supp in itertools.combinations(free, k):
            for vals in itertools.product(syms, repeat=k):
                w = TreeWord(tuple(zip(supp, vals)))
                c = try_classify(w, ctx.tree)
                if c is None or (component is not None and c != component):
                    continue
                yield w


# ---------------------------------------------------------------------------
# Text form: located words are ``[pos:sym, ...]`` and strings are ``<sym sym ...>``
# with ``'a'`` for a letter and ``$n`` for the variable of node n.

def format_symbol(s: Symbol, ctx: WordContext) -> str:
    if isinstance(s, Letter):
        return "'" + ctx.alphabet[s.index] + "'"
    return f"${s.node}"


def format_word(w: Word, ctx: WordContext) -> str:
    if isinstance(w, StringWord):
        return "<" + " ".join(format_symbol(s, ctx) for s in w.symbols) + ">"
    return "[" + ", ".join(f"{p}:{format_symbol(s, ctx)}" for p, s in w.entries) + "]"


_SYM = r"(?:'([^']*)'|\$(\d+))"
_ENTRY = re.compile(r"\s*(\d+)\s*:\s*" + _SYM + r"\s*")
_STRSYM = re.compile(r"\s*" + _SYM + r"\s*")


def _symbol(ctx: WordContext, letter: Optional[str], node: Optional[str]) -> Symbol:
    s = ctx.letter(letter) if letter is not None else Var(int(node))
    ctx.check_symbol(s)
    return s


def parse_word(text: str, ctx: WordContext) -> Word:
    text = text.strip()
    if text.startswith("<") and text.endswith(">"):
        body, pos, out = text[1:-1], 0, []
        while body[pos:].strip():
            m = _STRSYM.match(body, pos)
            if not m:
                raise ValueError(f"bad string word {text!r}")
            out.append(_symbol(ctx, m.group(1), m.group(2)))
            pos = m.end()
        return StringWord(tuple(out))
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError(f"bad word literal {text!r}")
    body = text[1:-1]
    entries = {}
    if body.strip():
        for part in body.split(","):
            m = _ENTRY.fullmatch(part)
            if not m:
                raise ValueError(f"bad word entry {part!r}")
            p = int(m.group(1))
            if p in entries:
                raise DomainsOverlap(f"position {p} repeated")
            entries[p] = _symbol(ctx, m.group(2), m.group(3))
    return TreeWord.of(entries)
