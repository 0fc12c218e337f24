"""Tree actions on a finite semigroup and the idempotent assignments they admit.

A finite tree action fixes one subsemigroup per node and a family of
semigroup endomorphisms, each paired with a regressive homomorphism of the
tree (its spine).  An assignment picks one element per node; it is
equivariant when every endomorphism maps the value at ``t`` to the value at
``spine(t)``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Sequence

from .errors import InvalidAction, NoIdempotentInStage, NotLayered
from .semigroups import (
    FiniteSemigroup,
    all_semigroups,
    cyclic_group,
    direct_product,
    ideals,
    left_zero,
    min_semilattice,
    minimal_idempotents,
    minimal_lift,
    multiplicative_mod,
    right_zero,
    set_leq,
    subsemigroups,
)
from .trees import RegressiveHom, RootedTree, compose_homs, enumerate_regressive_homs, identity_hom, predecessor, tree_leq


@dataclass(frozen=True)
class Endo:
    mapping: tuple[int, ...]
    spine: RegressiveHom

    def __call__(self, x: int) -> int:
        return self.mapping[x]


def compose_endos(a: Endo, b: Endo) -> Endo:
    """``a`` after ``b``."""
    return Endo(tuple(a.mapping[v] for v in b.mapping), compose_homs(a.spine, b.spine))


def close_endos(endos: Sequence[Endo]) -> tuple[Endo, ...]:
    out = list(dict.fromkeys(endos))
    seen = set(out)
    i = 0
    while i < len(out):
        for j in range(len(out)):
            for c in (compose_endos(out[i], out[j]), compose_endos(out[j], out[i])):
                if c not in seen:
                    seen.add(c)
                    out.append(c)
        i += 1
    return tuple(out)


def is_semigroup_hom(S: FiniteSemigroup, m: Sequence[int]) -> bool:
    return all(m[S.op(x, y)] == S.op(m[x], m[y]) for x in S.elements() for y in S.elements())


@dataclass(frozen=True)
class TreeActionFin:
    semigroup: FiniteSemigroup
    tree: RootedTree
    node_sub: tuple[frozenset, ...]
    endos: tuple[Endo, ...]

    def __post_init__(self):
        object.__setattr__(self, "node_sub", tuple(frozenset(x) for x in self.node_sub))
        object.__setattr__(self, "endos", tuple(self.endos))
        problems = action_problems(self)
        if problems:
            raise InvalidAction("; ".join(problems[:5]))


def action_problems(act: TreeActionFin, check_closure: bool = True) -> list[str]:
    S, T, X = act.semigroup, act.tree, act.node_sub
    out = []
    if len(X) != T.size:
        return [f"{len(X)} node sets for {T.size} nodes"]
    for t in T.nodes():
        if not S.is_subsemigroup(X[t]):
            out.append(f"node {t}: not a subsemigroup")
    for t in T.nodes():
        for u in T.ancestors(t):
            if not set_leq(S, X[t], X[u]):
                out.append(f"node sets not ordered at {t} <= {u}")
    for k, e in enumerate(act.endos):
        if e.spine.tree != T:
            out.append(f"endo {k}: spine on another tree")
            continue
        if len(e.mapping) != S.order or not is_semigroup_hom(S, e.mapping):
            out.append(f"endo {k}: not a semigroup homomorphism")
            continue
        for t in T.nodes():
            ft = e.spine(t)
            if any(e(x) not in X[ft] for x in X[t]):
                out.append(f"endo {k}: node {t} not mapped into node {ft}")
            if ft == t and any(e(x) != x for x in X[t]):
                out.append(f"endo {k}: does not fix node {t}")
    if check_closure and not out:
        fam = set(act.endos)
        for a in act.endos:
            for b in act.endos:
                if compose_endos(a, b) not in fam:
                    out.append("endo family not closed under composition")
                    return out
    return out


def equivariant_assignments(act: TreeActionFin, fixed: Optional[dict] = None) -> Iterator[tuple[int, ...]]:
    """All equivariant assignments, optionally with some node values pinned."""
    T, X = act.tree, act.node_sub
    n = T.size
    vals = [0] * n
    fixed = fixed or {}

    def rec(t: int):
        if t == n:
            yield tuple(vals)
            return
        opts = [fixed[t]] if t in fixed else sorted(X[t])
        for x in opts:
            if x not in X[t]:
                continue
            if all(e.spine(t) == t or e(x) == vals[e.spine(t)] for e in act.endos):
                vals[t] = x
                yield from rec(t + 1)

    yield from rec(0)


def is_equivariant(act: TreeActionFin, xi: Sequence[int]) -> bool:
    return all(xi[t] in act.node_sub[t] for t in act.tree.nodes()) and all(
        e(xi[t]) == xi[e.spine(t)] for e in act.endos for t in act.tree.nodes()
    )


def pointwise_sum(S: FiniteSemigroup, xi: Sequence[int], eta: Sequence[int]) -> tuple[int, ...]:
    return tuple(S.op(a, b) for a, b in zip(xi, eta))


def assignment_idempotent_power(S: FiniteSemigroup, xi: Sequence[int]) -> tuple[int, ...]:
    """Idempotent power of ``xi`` in the pointwise product semigroup."""
    seen = set()
    y = tuple(xi)
    while y not in seen:
        seen.add(y)
        y = pointwise_sum(S, y, y)
    z = y
    while pointwise_sum(S, z, z) != z:
        z = pointwise_sum(S, z, y)
    return z


def assignment_problems(act: TreeActionFin, xi: Sequence[int]) -> list[str]:
    """Everything an order-preserving equivariant idempotent assignment must satisfy."""
    S, T, X = act.semigroup, act.tree, act.node_sub
    out = []
    for t in T.nodes():
        if xi[t] not in X[t]:
            out.append(f"value at {t} outside its node set")
        elif not S.is_idempotent(xi[t]):
            out.append(f"value at {t} not idempotent")
    if out:
        return out
    for t0 in T.nodes():
        for t1 in T.ancestors(t0):
            a, b = xi[t0], xi[t1]
            if not (S.op(a, b) == a and S.op(b, a) == a):
                out.append(f"values not ordered at {t0} <= {t1}")
    for k, e in enumerate(act.endos):
        for t in T.nodes():
            if e(xi[t]) != xi[e.spine(t)]:
                out.append(f"endo {k} breaks equivariance at {t}")
    return out


def _in_stage(act: TreeActionFin, xi, prev, k: int) -> bool:
    """Membership in the stage-k set built from the previous stage ``prev``."""
    S, T = act.semigroup, act.tree
    if not is_equivariant(act, xi):
        return False
    top = [t for t in T.nodes() if T.height(t) <= k]
    if any(xi[t] != prev[t] for t in top):
        return False
    for t0 in top:
        for t in T.nodes():
            if tree_leq(T, t, t0) and S.op(xi[t], xi[t0]) != xi[t]:
                return False
    return True


def order_preserving_idempotent(act: TreeActionFin, seed: Sequence[int], search_limit: int = 200_000) -> tuple[int, ...]:
    """Refine an equivariant idempotent assignment into an order-preserving one.

    Stage k+1 is an idempotent agreeing with stage k on nodes of height at
    most k and absorbed on the right by those values below them.  Each stage
    starts from the sum of the previous stage along the root path; if that
    sum somehow misses the stage set, the stage set is scanned directly.
    The result at a node of height n sums stage n along the root path,
    root first.  When a stage set turns out empty (possible once a spine is
    not order-preserving) the assignments with the seed's root value are
    scanned directly.
    """
    S, T = act.semigroup, act.tree
    seed = tuple(seed)
    if not is_equivariant(act, seed) or any(not S.is_idempotent(x) for x in seed):
        raise InvalidAction("seed is not an equivariant idempotent assignment")
    H = T.max_height()
    stages = [seed]
    for k in range(H):
        prev = stages[-1]
        cand = tuple(
            S.sum_of([prev[predecessor(T, t, j)] for j in range(T.height(t) + 1)]) for t in T.nodes()
        )
        nxt = None
        if _in_stage(act, cand, prev, k):
            nxt = assignment_idempotent_power(S, cand)
        else:
            for count, xi in enumerate(equivariant_assignments(act, {t: prev[t] for t in T.nodes() if T.height(t) <= k})):
                if count >= search_limit:
                    break
                if _in_stage(act, xi, prev, k):
                    nxt = assignment_idempotent_power(S, xi)
                    break
        if nxt is None:
            return _scan_for_order_preserving(act, seed[0], search_limit, k + 1)
        stages.append(nxt)
    return tuple(
        S.sum_of([stages[T.height(t)][predecessor(T, t, j)] for j in range(T.height(t), -1, -1)])
        for t in T.nodes()
    )


def _scan_for_order_preserving(act: TreeActionFin, root_value: int, limit: int, stage: int) -> tuple[int, ...]:
    # The staged construction can stall when a spine folds a branch; fall back
    # to a direct scan so that failure always means no such assignment exists.
    for count, xi in enumerate(equivariant_assignments(act, {0: root_value})):
        if count >= limit:
            break
        if not assignment_problems(act, xi):
            return xi
    raise NoIdempotentInStage(
        f"stage {stage} is empty and no order-preserving idempotent has root value {root_value}")


def layering_problems(act: TreeActionFin) -> list[str]:
    S, T, X = act.semigroup, act.tree, act.node_sub
    out = []
    for k, e in enumerate(act.endos):
        for t in range(1, T.size):
            if e.spine(t) not in (t, T.parent(t)):
                out.append(f"endo {k} moves node {t} more than one level")
    if out:
        return out
    for t in range(1, T.size):
        p = T.parent(t)
        down = [e for e in act.endos if e.spine(t) == p]
        if not down:
            continue
        for m in minimal_idempotents(S, X[p]):
            if not any(all(e(q) == m for e in down) for q in X[t]):
                out.append(f"minimal idempotent {m} at node {p} has no common preimage at node {t}")
    return out


def layered_minimal_assignment(act: TreeActionFin) -> tuple[int, ...]:
    """Equivariant order-preserving assignment of minimal idempotents, node by node."""
    problems = layering_problems(act)
    if problems:
        raise NotLayered("; ".join(problems))
    S, T, X = act.semigroup, act.tree, act.node_sub
    x = [0] * T.size
    x[0] = minimal_idempotents(S, X[0])[0]
    for t in range(1, T.size):
        p = T.parent(t)
        xp = x[p]
        down = [e for e in act.endos if e.spine(t) == p]
        if not down:
            x[t] = minimal_lift(S, X[t], X[p], xp)
            continue
        Y = [z for z in sorted(X[t]) if all(e(z) == xp for e in down)]
        C = frozenset(S.op(y, xp) for y in Y)
        pick = [a for a in minimal_idempotents(S, C) if S.op(xp, a) == a and S.op(a, xp) == a]
        if not pick:
            raise NotLayered(f"no minimal idempotent below {xp} at node {t}")
        x[t] = pick[0]
    return tuple(x)


def minimality_problems(act: TreeActionFin, xi: Sequence[int]) -> list[str]:
    """Direct scan: no idempotent of X_t lies strictly below the value at t."""
    S, X = act.semigroup, act.node_sub
    out = []
    for t in act.tree.nodes():
        x = xi[t]
        for y in sorted(X[t]):
            if y != x and S.op(y, y) == y and S.op(y, x) == y and S.op(x, y) == y:
                out.append(f"idempotent {y} lies below the value {x} at node {t}")
    return out


# ---------------------------------------------------------------------------
# Random valid actions, used by tests and the acceptance suite.

@lru_cache(maxsize=None)
def semigroup_library() -> tuple[FiniteSemigroup, ...]:
    lib = []
    for n in (1, 2, 3):
        lib.extend(all_semigroups(n))
    lib += [cyclic_group(4), cyclic_group(5), multiplicative_mod(4), multiplicative_mod(5),
            left_zero(4), right_zero(4), min_semilattice(4), min_semilattice(5),
            direct_product(cyclic_group(2), left_zero(2)), direct_product(cyclic_group(2), cyclic_group(2)),
            direct_product(min_semilattice(2), cyclic_group(2)), direct_product(right_zero(2), min_semilattice(2))]
    return tuple(lib)


@lru_cache(maxsize=None)
def semigroup_endomorphisms(S: FiniteSemigroup) -> tuple[tuple[int, ...], ...]:
    import itertools
    return tuple(m for m in itertools.product(range(S.order), repeat=S.order) if is_semigroup_hom(S, m))


def random_tree(rng: random.Random, max_nodes: int) -> RootedTree:
    n = rng.randint(1, max_nodes)
    return RootedTree(tuple(rng.randint(0, k) for k in range(n - 1)))


def random_action(rng: random.Random, max_nodes: int = 4, layered: bool = False, tries: int = 200):
    """A random valid action together with an equivariant idempotent seed."""
    lib = semigroup_library()
    for _ in range(tries):
        S = rng.choice(lib)
        T = random_tree(rng, max_nodes)
        subs, ids = subsemigroups(S), ideals(S)
        X = [rng.choice(subs)] + [rng.choice(ids) for _ in range(T.size - 1)]
        homs = enumerate_regressive_homs(T)
        if layered:
            homs = [h for h in homs if all(h(t) in (t, T.parent(t)) for t in range(1, T.size))]
        endos = [Endo(tuple(S.elements()), identity_hom(T))]
        maps = semigroup_endomorphisms(S)
        for _ in range(rng.randint(0, 3)):
            f = rng.choice(homs)
            valid = [m for m in maps if all(
                all(m[x] in X[f(t)] for x in X[t]) and (f(t) != t or all(m[x] == x for x in X[t]))
                for t in T.nodes())]
            if valid:
                endos.append(Endo(rng.choice(valid), f))
        try:
            act = TreeActionFin(S, T, tuple(X), close_endos(endos))
        except InvalidAction:
            continue
        if layered and layering_problems(act):
            continue
        assigns = []
        for i, xi in enumerate(equivariant_assignments(act)):
            assigns.append(xi)
            if i >= 500:
                break
        if not assigns:
            continue
        seed = assignment_idempotent_power(S, rng.choice(assigns))
        return act, seed
    raise RuntimeError("could not generate a valid action")
