"""Label automata, their strongly connected components and periods.

For a rooted problem the automaton has one state per allowed label and an
edge σ → σ' whenever σ' can appear as a child of σ. For an unrooted problem
the states are ordered pairs (x, y) of half-edge labels that can sit on two
distinct half-edges of one node; (x1, x2) → (y1, y2) whenever {x2, y1} is an
allowed edge. A walk in the automaton is a labeled path in a tree.

A component is *flexible* when it contains an edge and has period 1, i.e.
walks of every sufficiently large length connect any two of its states.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import gcd
from typing import Hashable, Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .problem import (
    RootedProblem,
    UnrootedProblem,
    restrict_rooted,
    sub_pairs,
)

__all__ = [
    "Automaton",
    "FlexComponent",
    "build_automaton_rooted",
    "build_automaton_unrooted",
    "strongly_connected_components",
    "component_period",
    "analyze_components",
    "flex_scc_rooted",
    "flex_scc_unrooted",
]


@dataclass(frozen=True)
class Automaton:
    kind: str
    labels: tuple[str, ...]
    states: tuple[Hashable, ...]
    edges: tuple[frozenset[int], ...]

    def __len__(self) -> int:
        return len(self.states)

    def index(self, state) -> int:
        return self.states.index(state)

    def state_name(self, i: int) -> str:
        s = self.states[i]
        if self.kind == "rooted":
            return f"L:{self.labels[s]}"
        return f"P:{self.labels[s[0]]}|{self.labels[s[1]]}"

    def to_dot(self) -> str:
        lines = ["digraph automaton {"]
        for i in range(len(self.states)):
            lines.append(f'  "{self.state_name(i)}";')
        for i, succ in enumerate(self.edges):
            for j in sorted(succ):
                lines.append(f'  "{self.state_name(i)}" -> "{self.state_name(j)}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FlexComponent:
    states: frozenset            # state values (label ids or ordered pairs)
    period: int | None
    flexible: bool


def build_automaton_rooted(p: RootedProblem, allowed: Iterable[int] | None = None) -> Automaton:
    allowed = p.label_ids if allowed is None else frozenset(allowed)
    states = tuple(sorted(allowed))
    pos = {s: i for i, s in enumerate(states)}
    succ: list[set[int]] = [set() for _ in states]
    for parent, children in restrict_rooted(p, allowed).constraints:
        for c in children:
            succ[pos[parent]].add(pos[c])
    return Automaton("rooted", p.labels, states, tuple(frozenset(s) for s in succ))


def build_automaton_unrooted(p: UnrootedProblem, allowed_configs: Iterable | None = None) -> Automaton:
    configs = p.node_configs if allowed_configs is None else allowed_configs
    pairs = set()
    for c in configs:
        pairs |= sub_pairs(c)
    states = sorted({(x, y) for x, y in pairs} | {(y, x) for x, y in pairs})
    by_first: dict[int, list[int]] = {}
    for i, (x, _) in enumerate(states):
        by_first.setdefault(x, []).append(i)
    succ = []
    for _, x2 in states:
        out = set()
        for y1 in p.partners[x2]:
            out.update(by_first.get(y1, ()))
        succ.append(frozenset(out))
    return Automaton("unrooted", p.labels, tuple(states), tuple(succ))


def strongly_connected_components(a: Automaton) -> list[frozenset[int]]:
    """SCCs as sets of state indices, ordered by smallest member."""
    n = len(a.states)
    if n == 0:
        return []
    rows = [i for i, succ in enumerate(a.edges) for _ in succ]
    cols = [j for succ in a.edges for j in succ]
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, comp = connected_components(graph, directed=True, connection="strong")
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(comp):
        groups.setdefault(int(c), []).append(i)
    return sorted((frozenset(g) for g in groups.values()), key=min)


def component_period(a: Automaton, comp: Iterable[int]) -> int | None:
    """gcd of closed-walk lengths inside ``comp``; ``None`` if it has no edge."""
    comp = frozenset(comp)
    if not comp:
        return None
    start = min(comp)
    level = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in a.edges[u]:
            if v in comp and v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    g, seen_edge = 0, False
    for u in comp:
        for v in a.edges[u]:
            if v in comp:
                seen_edge = True
                g = gcd(g, abs(level[u] + 1 - level[v]))
    return g if seen_edge else None


def analyze_components(a: Automaton) -> list[FlexComponent]:
    out = []
    for comp in strongly_connected_components(a):
        period = component_period(a, comp)
        out.append(FlexComponent(frozenset(a.states[i] for i in comp), period, period == 1))
    return out


def _sort_sets(sets) -> tuple[frozenset, ...]:
    return tuple(sorted(set(sets), key=lambda s: sorted(s)))


def flex_scc_rooted(p: RootedProblem, sigma_sub: Iterable[int]) -> tuple[frozenset[int], ...]:
    """Label sets of the flexible SCCs of the automaton restricted to ``sigma_sub``."""
    a = build_automaton_rooted(p, sigma_sub)
    return _sort_sets(c.states for c in analyze_components(a) if c.flexible)


def flex_scc_unrooted(p: UnrootedProblem, v_sub: Iterable) -> tuple[frozenset, ...]:
    """Edge-configuration sets 𝒟 induced by flexible SCCs of the restricted automaton.

    A component U yields 𝒟 = {{x, y} : (x, y) ∈ U}, kept only when the states
    whose multiset lies in 𝒟 are exactly U.
    """
    a = build_automaton_unrooted(p, v_sub)
    out = []
    for comp in analyze_components(a):
        if not comp.flexible:
            continue
        d = frozenset(tuple(sorted(s)) for s in comp.states)
        lifted = frozenset(s for s in a.states if tuple(sorted(s)) in d)
        if lifted == comp.states:
            out.append(d)
    return _sort_sets(out)
