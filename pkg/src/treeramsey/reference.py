"""Plain re-implementations used to double-check search results.

Nothing here calls into the word algebra or the search code: words are
handled as ``{position: ("v", node) | ("l", letter)}`` dicts (or lists for
strings) and substitutions as plain dicts, so a bug in the fast path cannot
silently confirm itself.
"""

from __future__ import annotations

from typing import Optional


def raw_word(word) -> object:
    """Convert a word object into the plain representation."""
    if hasattr(word, "entries"):
        return {p: _raw_sym(s) for p, s in word.entries}
    return [_raw_sym(s) for s in word.symbols]


def _raw_sym(s):
    return ("v", s.node) if hasattr(s, "node") else ("l", s.index)


def raw_substitution(sigma) -> dict:
    return {t: _raw_sym(s) for t, s in sigma.mapping}


def raw_spine(parents: tuple, table: dict) -> list:
    n = len(parents) + 1
    return [0] + [table[t][1] if t in table and table[t][0] == "v" else 0 for t in range(1, n)]


def apply(table: dict, word):
    if isinstance(word, list):
        return [s if s[0] == "l" else table[s[1]] for s in word]
    out = {}
    for p, s in word.items():
        if s[0] == "l":
            out[p] = s
        elif s[1] in table:
            out[p] = table[s[1]]
    return out


def root_path(parents: tuple, t: int) -> list:
    path = [t]
    while t != 0:
        t = parents[t - 1]
        path.append(t)
    return path


def least_of_chain(parents: tuple, nodes) -> Optional[int]:
    """Deepest node of a chain, 0 for the empty set, None for a non-chain."""
    nodes = set(nodes)
    if not nodes:
        return 0
    for t in nodes:
        if nodes <= set(root_path(parents, t)):
            return t
    return None


def component(parents: tuple, word) -> Optional[int]:
    syms = word if isinstance(word, list) else word.values()
    return least_of_chain(parents, {s[1] for s in syms if s[0] == "v"})


def add(w0, w1):
    if isinstance(w0, list):
        return w0 + w1
    if set(w0) & set(w1):
        return None
    out = dict(w0)
    out.update(w1)
    return out
