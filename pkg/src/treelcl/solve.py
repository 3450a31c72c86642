"""Labeling verifiers and an exact offline solver.

The solver is a feasible-set dynamic program. Rooted: bottom-up, each node
gets the set of labels it can take given its subtree; a top-down pass then
commits to concrete labels. Unrooted: the tree is rooted anywhere and each
node gets the set of labels its half-edge towards the parent can take.

Both DPs run on generic adjacency maps so the online harness can reuse them
on partial views, where some nodes are left unconstrained because part of
their neighbourhood is not visible.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .problem import RootedProblem, UnrootedProblem
from .trees import Tree

__all__ = [
    "Verdict",
    "check_rooted",
    "check_unrooted",
    "solve_offline",
    "solve_rooted_forest",
    "solve_unrooted_component",
    "feasible_root_labels",
    "feasible_root_configs",
]


@dataclass(frozen=True)
class Verdict:
    ok: bool
    violations: tuple = field(default=())

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"verdict": "PASS" if self.ok else "FAIL", "violations": [list(v) for v in self.violations]}


def _fail_or_pass(violations: list) -> Verdict:
    return Verdict(not violations, tuple(violations))


def check_rooted(g: Tree, labeling: Sequence, p: RootedProblem) -> Verdict:
    """Every node with exactly Δ children must match a constraint of 𝒱."""
    if len(labeling) != g.n:
        return Verdict(False, (("structure", f"labeling has {len(labeling)} entries for {g.n} nodes"),))
    missing = [v for v, x in enumerate(labeling) if x is None]
    if missing:
        return Verdict(False, tuple(("missing", v) for v in missing))
    bad_ids = [v for v, x in enumerate(labeling) if not 0 <= x < p.n_labels]
    if bad_ids:
        return Verdict(False, tuple(("bad-label", v) for v in bad_ids))
    kids = g.children
    cons = p.constraint_set
    out = []
    for v in range(g.n):
        if len(kids[v]) != p.delta:
            continue
        key = (labeling[v], tuple(sorted(labeling[c] for c in kids[v])))
        if key not in cons:
            out.append(("node", v))
    return _fail_or_pass(out)


def check_unrooted(g: Tree, half_edges: Mapping[tuple[int, int], int], p: UnrootedProblem) -> Verdict:
    """Degree-Δ nodes need a configuration in 𝒱, every edge a pair in ℰ."""
    adj = g.adjacency
    missing = [(v, u) for v in range(g.n) for u in adj[v] if half_edges.get((v, u)) is None]
    if missing:
        return Verdict(False, tuple(("missing", v, u) for v, u in missing))
    nodes = set(p.node_configs)
    out = []
    for v in range(g.n):
        if len(adj[v]) == p.delta:
            if tuple(sorted(half_edges[(v, u)] for u in adj[v])) not in nodes:
                out.append(("node", v))
    for a, b in g.edges():
        if tuple(sorted((half_edges[(a, b)], half_edges[(b, a)]))) not in p.edge_set:
            out.append(("edge", a, b))
    return _fail_or_pass(out)


# --- matching a multiset against per-child candidate sets ---------------------

@lru_cache(maxsize=1 << 16)
def _assign(config: tuple[int, ...], cands: tuple[frozenset, ...]) -> tuple[int, ...] | None:
    """Give each child one element of ``config`` from its candidate set, using each element once."""
    if not cands:
        return () if not config else None
    if len(config) != len(cands):
        return None
    remaining = Counter(config)
    # most constrained child first
    order = sorted(range(len(cands)), key=lambda j: len(cands[j]))
    chosen = [0] * len(cands)

    def rec(k: int) -> bool:
        if k == len(order):
            return True
        j = order[k]
        for x in sorted(cands[j]):
            if remaining[x] > 0:
                remaining[x] -= 1
                chosen[j] = x
                if rec(k + 1):
                    return True
                remaining[x] += 1
        return False

    return tuple(chosen) if rec(0) else None


def _min_choice(options: Iterable[int]) -> int:
    return min(options)


# --- rooted DP ------------------------------------------------------------------

def solve_rooted_forest(
    order: Sequence[Hashable],
    children: Mapping,
    constrained: Callable[[Hashable], bool],
    p: RootedProblem,
    fixed: Mapping | None = None,
    allowed: Iterable[int] | None = None,
    choose: Callable[[Iterable[int]], int] = _min_choice,
) -> dict | None:
    """Label a rooted forest.

    ``order`` lists the nodes parents-first; nodes whose parent is not in
    ``order`` are roots. ``constrained(v)`` says whether v's node constraint
    is enforced (all Δ children known). Returns a label per node or ``None``
    if no labeling exists.
    """
    fixed = fixed or {}
    base = frozenset(p.label_ids if allowed is None else allowed)
    feas = _rooted_feasible(order, children, constrained, p, fixed, base)
    if feas is None:
        return None
    members = set(order)
    labels: dict = {}
    for v in order:
        if v not in labels:
            labels[v] = choose(feas[v])
        kids = children.get(v, ()) if isinstance(children, dict) else children[v]
        kids = [c for c in kids if c in members]
        if not kids:
            continue
        if constrained(v):
            cands = tuple(feas[c] for c in kids)
            for conf in p.by_parent[labels[v]]:
                got = _assign(conf, cands)
                if got is not None:
                    for c, x in zip(kids, got):
                        labels[c] = x
                    break
            else:  # pragma: no cover - excluded by the bottom-up pass
                raise AssertionError("inconsistent feasible sets")
        else:
            for c in kids:
                labels[c] = choose(feas[c])
    return labels


def _rooted_feasible(order, children, constrained, p, fixed, base):
    members = set(order)
    feas: dict = {}
    memo: dict = {}
    for v in reversed(order):
        kids = children.get(v, ()) if isinstance(children, dict) else children[v]
        kids = [c for c in kids if c in members]
        own = base & {fixed[v]} if v in fixed else base
        if constrained(v):
            cands = tuple(feas[c] for c in kids)
            key = (own, cands)
            f = memo.get(key)
            if f is None:
                f = frozenset(s for s in own if any(_assign(cf, cands) is not None for cf in p.by_parent[s]))
                memo[key] = f
        else:
            f = own if all(feas[c] for c in kids) else frozenset()
        if not f:
            return None
        feas[v] = f
    return feas


def feasible_root_labels(g: Tree, p: RootedProblem, allowed: Iterable[int] | None = None) -> frozenset[int]:
    """Labels the (single) root of ``g`` can take in some valid labeling."""
    if len(g.roots) != 1:
        raise ValueError("expected a tree with one root")
    kids = g.children
    base = frozenset(p.label_ids if allowed is None else allowed)
    feas = _rooted_feasible(g.order, kids, lambda v: len(kids[v]) == p.delta, p, {}, base)
    return frozenset() if feas is None else feas[g.roots[0]]


# --- unrooted DP ----------------------------------------------------------------

def _unrooted_bottom_up(root, adjacency, constrained, p, fixed, root_free=False):
    full = frozenset(range(p.n_labels))
    partners = p.partners
    configs = p.node_configs
    par = {root: None}
    order = [root]
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for w in adjacency[v]:
            if w not in par:
                par[w] = v
                order.append(w)
    kids = {v: [w for w in adjacency[v] if w != par[v] and par.get(w) == v] for v in order}

    def own(v, u):
        return full & {fixed[(v, u)]} if (v, u) in fixed else full

    up: dict = {}          # labels for half-edge (v, parent)
    down: dict = {}        # labels for half-edge (v, c) compatible with c's subtree
    for v in reversed(order):
        for c in kids[v]:
            a = frozenset(x for x in own(v, c) if partners[x] & up[c])
            if not a:
                return None
            down[(v, c)] = a
        cands = tuple(down[(v, c)] for c in kids[v])
        if par[v] is None:
            if not root_free and constrained(v) and not any(_assign(cf, cands) is not None for cf in configs):
                return None
            continue
        ys = own(v, par[v])
        if constrained(v):
            ys = frozenset(y for y in ys if any(y in cf and _assign(_drop(cf, y), cands) is not None for cf in configs))
        if not ys:
            return None
        up[v] = ys
    return order, par, kids, up, down


def solve_unrooted_component(
    root: Hashable,
    adjacency: Mapping,
    constrained: Callable[[Hashable], bool],
    p: UnrootedProblem,
    fixed: Mapping | None = None,
    choose: Callable[[Iterable[int]], int] = _min_choice,
) -> dict | None:
    """Half-edge labeling of the connected component of ``root``.

    ``fixed`` pins half-edge labels, keyed by ``(node, neighbour)``. Nodes
    with ``constrained(v)`` false accept any multiset. Returns a dict keyed
    by ``(node, neighbour)`` or ``None`` when unsatisfiable.
    """
    got_dp = _unrooted_bottom_up(root, adjacency, constrained, p, fixed or {})
    if got_dp is None:
        return None
    order, par, kids, up, down = got_dp
    partners = p.partners
    configs = p.node_configs
    out: dict = {}
    for v in order:
        ks = kids[v]
        cands = tuple(down[(v, c)] for c in ks)
        if par[v] is None:
            if constrained(v):
                got = next(a for a in (_assign(cf, cands) for cf in configs) if a is not None)
            else:
                got = tuple(choose(a) for a in cands)
        else:
            y = out[(v, par[v])]
            if constrained(v):
                got = next(a for a in (_assign(_drop(cf, y), cands) for cf in configs if y in cf) if a is not None)
            else:
                got = tuple(choose(a) for a in cands)
        for c, x in zip(ks, got):
            out[(v, c)] = x
            out[(c, v)] = choose(partners[x] & up[c])
    return out


def _drop(config: tuple[int, ...], y: int) -> tuple[int, ...]:
    i = config.index(y)
    return config[:i] + config[i + 1:]


def feasible_root_configs(g: Tree, p: UnrootedProblem) -> frozenset[tuple[int, ...]]:
    """Configurations of 𝒱 that the root of ``g`` can use in a valid labeling.

    All other degree-Δ nodes are constrained by 𝒱 and all edges by ℰ.
    """
    root = g.roots[0]
    adj = g.adjacency
    if len(adj[root]) != p.delta:
        raise ValueError("root must have degree delta")
    got = _unrooted_bottom_up(root, adj, lambda v: len(adj[v]) == p.delta, p, {}, root_free=True)
    if got is None:
        return frozenset()
    _, _, kids, _, down = got
    cands = tuple(down[(root, c)] for c in kids[root])
    return frozenset(cf for cf in p.node_configs if _assign(cf, cands) is not None)


def solve_offline(g: Tree, p, fixed: Mapping | None = None, allowed: Iterable[int] | None = None):
    """Exact labeling of a whole tree, or ``None`` (UNSAT).

    Rooted problems return a list of label ids indexed by node; unrooted
    problems return a dict keyed by ``(node, neighbour)``.
    """
    if isinstance(p, RootedProblem):
        kids = g.children
        sol = solve_rooted_forest(g.order, kids, lambda v: len(kids[v]) == p.delta, p, fixed, allowed)
        if sol is None:
            return None
        return [sol[v] for v in range(g.n)]
    adj = g.adjacency
    out: dict = {}
    for r in g.roots:
        sol = solve_unrooted_component(r, adj, lambda v: len(adj[v]) == p.delta, p, fixed)
        if sol is None:
            return None
        out.update(sol)
    return out
