"""Tree actions on word semigroups and the single-step Ramsey witness search."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

from . import reference as ref
from .errors import BudgetExceeded, DomainsOverlap
from .trees import compose_homs
from .words import (
    NONLOCATED,
    Letter,
    StringWord,
    SubstitutionMap,
    TreeWord,
    Var,
    Word,
    WordContext,
    add_words,
    compose_substitutions,
    empty_word,
    substitution_apply,
    symbol_key,
    try_classify,
)

DEFAULT_CLOSURE_DEPTH = 3


def endo_closure(endos: Sequence[SubstitutionMap], depth: int = DEFAULT_CLOSURE_DEPTH) -> tuple[SubstitutionMap, ...]:
    """Compositions of at most ``depth`` generators, deduplicated by table."""
    seen = {}
    layer = list(endos)
    for e in layer:
        seen.setdefault(e.mapping, e)
    for _ in range(depth - 1):
        nxt = []
        for a in layer:
            for b in endos:
                c = compose_substitutions(b, a)
                if c.mapping not in seen:
                    seen[c.mapping] = c
                    nxt.append(c)
        if not nxt:
            break
        layer = nxt
    return tuple(seen.values())


@dataclass(frozen=True)
class WordAction:
    context: WordContext
    endos: tuple[SubstitutionMap, ...]

    def component_of(self, w: Word) -> Optional[int]:
        return try_classify(w, self.context.tree)

    def root_is_trivial(self) -> bool:
        """Letter-free contexts have only the empty word at the root."""
        return not self.context.alphabet


def component_words(ctx: WordContext, t: int, lo: int, hi: int, nonempty: bool = True) -> Iterator[Word]:
    """Words of component ``t`` inside [lo, hi), ordered by largest position, then size, then lexicographically.

    For nonlocated contexts the window is a length range: strings of length lo..hi-1.
    """
    tree = ctx.tree
    chain = [s for s in tree.ancestors(t) if s != 0]
    syms = [*ctx.letters()] + [Var(s) for s in sorted(chain)]
    syms.sort(key=symbol_key)
    need = None if t == 0 else Var(t)
    if ctx.kind == NONLOCATED:
        for length in range(max(lo, 1 if nonempty else 0), hi):
            for vals in itertools.product(syms, repeat=length):
                if need is None or need in vals:
                    yield StringWord(tuple(vals))
        return
    if not nonempty and lo <= hi:
        yield TreeWord()
    for top in range(lo, hi):
        rest = range(lo, top)
        for k in range(0, top - lo + 1):
            for supp in itertools.combinations(rest, k):
                supp = supp + (top,)
                for vals in itertools.product(syms, repeat=len(supp)):
                    if need is None or need in vals:
                        yield TreeWord(tuple(zip(supp, vals)))


@dataclass
class ActionReport:
    violations: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def _sample_words(ctx: WordContext, rng: random.Random, count: int, window: int) -> list:
    syms = ctx.symbols()
    out = []
    for _ in range(count):
        if ctx.kind == NONLOCATED:
            out.append(StringWord(tuple(rng.choice(syms) for _ in range(rng.randint(0, window)))))
        else:
            supp = sorted(rng.sample(range(window * 2), rng.randint(0, window)))
            out.append(TreeWord(tuple((p, rng.choice(syms)) for p in supp)))
    return out


def check_action_axioms(action: WordAction, samples: int = 300, seed: int = 0, window: int = 5) -> ActionReport:
    """Sampled check of the action axioms; violations are returned, never raised."""
    ctx = action.context
    tree = ctx.tree
    rng = random.Random(seed)
    rep = ActionReport()
    words = [w for w in _sample_words(ctx, rng, samples, window) if try_classify(w, tree) is not None]
    for k, e in enumerate(action.endos):
        f = e.spine
        for w in words:
            rep.checked += 1
            t = try_classify(w, tree)
            img = substitution_apply(e, w)
            c = try_classify(img, tree)
            if c != f(t):
                rep.violations.append({"kind": "component", "endo": e.name or k, "node": t,
                                       "expected": f(t), "got": c})
            if f(t) == t and img != w:
                rep.violations.append({"kind": "fixed-point", "endo": e.name or k, "node": t})
        for w0, w1 in zip(words, words[1:]):
            try:
                s = add_words(w0, w1)
            except DomainsOverlap:
                continue
            rep.checked += 1
            if substitution_apply(e, s) != add_words(substitution_apply(e, w0), substitution_apply(e, w1)):
                rep.violations.append({"kind": "homomorphism", "endo": e.name or k})
        for j, e2 in enumerate(action.endos):
            rep.checked += 1
            if compose_substitutions(e, e2).spine != compose_homs(e.spine, e2.spine):
                rep.violations.append({"kind": "spine-functoriality", "endos": [e.name or k, e2.name or j]})
    return rep


@dataclass(frozen=True)
class RamseyWitness:
    assignment: tuple[Word, ...]
    colors: dict


@dataclass(frozen=True)
class Exhausted:
    bound: int
    explored: int


def find_ramsey_witness(action: WordAction, avoid: Sequence[Word], coloring: Callable[[Word], int],
                        endos: Sequence[SubstitutionMap], bound: int, budget: int = 2_000_000):
    """Backtracking search for one word per node meeting the single-step Ramsey condition.

    ``x(t)`` lies in component t and is fresh with respect to ``avoid``;
    ``color(tau(x(t)))`` may depend only on ``spine_tau(t)``.
    Returns a RamseyWitness or Exhausted; raises BudgetExceeded.
    """
    ctx = action.context
    tree = ctx.tree
    lo = 0
    if ctx.kind != NONLOCATED:
        used = [p for w in avoid for p in w.support]
        lo = max(used) + 1 if used else 0
    n = tree.size
    cands = []
    for t in range(n):
        if t == 0 and action.root_is_trivial():
            cands.append([empty_word(ctx)])
        else:
            cands.append(list(component_words(ctx, t, lo, bound) if ctx.kind != NONLOCATED
                              else component_words(ctx, t, 1, bound + 1)))
    chosen: list = [None] * n
    colors: dict = {}
    explored = 0

    def rec(t):
        nonlocal explored
        if t == n:
            return True
        for w in cands[t]:
            explored += 1
            if explored > budget:
                raise BudgetExceeded(f"explored {explored} candidates")
            added = []
            ok = True
            for e in endos:
                key = e.spine(t)
                c = coloring(substitution_apply(e, w))
                if key in colors:
                    if colors[key] != c:
                        ok = False
                        break
                else:
                    colors[key] = c
                    added.append(key)
            if ok:
                chosen[t] = w
                if rec(t + 1):
                    return True
            for key in added:
                del colors[key]
        return False

    if rec(0):
        return RamseyWitness(tuple(chosen), dict(colors))
    return Exhausted(bound, explored)


def verify_ramsey_witness(action: WordAction, avoid: Sequence[Word], coloring: Callable[[Word], int],
                          endos: Sequence[SubstitutionMap], witness: RamseyWitness) -> Optional[str]:
    """Independent re-check through the reference evaluator; None means valid."""
    parents = action.context.tree.parents
    located = action.context.kind != NONLOCATED
    used = set()
    for w in avoid:
        used.update(ref.raw_word(w))
    by_key: dict = {}
    for t, w in enumerate(witness.assignment):
        raw = ref.raw_word(w)
        if ref.component(parents, raw) != t:
            return f"value at node {t} is not in component {t}"
        if located and used & set(raw):
            return f"value at node {t} meets the avoided positions"
        if not raw and t != 0:
            return f"value at node {t} is empty"
        for e in endos:
            table = ref.raw_substitution(e)
            key = ref.raw_spine(parents, table)[t]
            c = coloring(_from_raw(ref.apply(table, raw)))
            if by_key.setdefault(key, c) != c:
                return f"colour at spine node {key} is not constant"
    return None


def _raw_symbol(s):
    return Var(s[1]) if s[0] == "v" else Letter(s[1])


def _from_raw(raw):
    mk = _raw_symbol
    if isinstance(raw, list):
        return StringWord(tuple(mk(s) for s in raw))
    return TreeWord(tuple(sorted((p, mk(s)) for p, s in raw.items())))
