"""Independent reference implementations used by the tests.

Each oracle takes a different route from the library code it checks:
labelability is decided by solving concrete complete trees, flexibility by
brute-force boolean matrix powers, SCCs by networkx, depth by enumerating
good sequences literally, peeling by deleting leaves from a networkx graph
and node counts by explicit construction-free recurrences.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import networkx as nx
import numpy as np

from treelcl.problem import RootedProblem, UnrootedProblem
from treelcl.solve import feasible_root_configs, feasible_root_labels
from treelcl.trees import DELTA_ARY, T_STAR, complete_tree

INF = float("inf")


# --- random problems ---------------------------------------------------------------

def random_rooted(rng: np.random.Generator, max_labels: int = 4, max_delta: int = 3, density=None) -> RootedProblem:
    k = int(rng.integers(1, max_labels + 1))
    delta = int(rng.integers(1, max_delta + 1))
    combos = [(s, c) for s in range(k) for c in itertools.combinations_with_replacement(range(k), delta)]
    q = rng.uniform(0.15, 0.7) if density is None else density
    keep = [x for x in combos if rng.random() < q]
    return RootedProblem(delta, tuple("abcdefgh"[:k]), tuple(keep))


def random_unrooted(rng: np.random.Generator, max_labels: int = 3, max_delta: int = 3) -> UnrootedProblem:
    k = int(rng.integers(1, max_labels + 1))
    delta = int(rng.integers(2, max_delta + 1))
    nodes = [c for c in itertools.combinations_with_replacement(range(k), delta) if rng.random() < rng.uniform(0.3, 0.8)]
    edges = [e for e in itertools.combinations_with_replacement(range(k), 2) if rng.random() < 0.6]
    return UnrootedProblem(delta, tuple("abcdefgh"[:k]), tuple(nodes), tuple(edges))


# --- trim by solving complete trees ----------------------------------------------------

@lru_cache(maxsize=None)
def _tree(delta: int, depth: int, kind: str):
    return complete_tree(delta, depth, kind)


def oracle_trim_rooted(p: RootedProblem, subset, depth: int | None = None) -> frozenset:
    """Labels that root a valid labeling of the complete Δ-ary tree of ``depth`` inside ``subset``.

    With the default depth |Σ|+1 this equals the trimmed set: the chain of
    root-label sets can shrink at most |Σ| times.
    """
    subset = frozenset(subset)
    if not subset:
        return frozenset()
    d = p.n_labels + 1 if depth is None else depth
    return feasible_root_labels(_tree(p.delta, d, DELTA_ARY), p, allowed=subset)


def oracle_trim_unrooted(p: UnrootedProblem, configs, depth: int | None = None) -> frozenset:
    """Configurations usable at the root of T*_depth (default |Σ|+1) with node constraints ``configs``."""
    configs = frozenset(configs)
    if not configs:
        return frozenset()
    d = p.n_labels + 1 if depth is None else depth
    sub = UnrootedProblem(p.delta, p.labels, tuple(sorted(configs)), p.edge_configs)
    return feasible_root_configs(_tree(p.delta, d, T_STAR), sub)


# --- automata and flexibility ------------------------------------------------------------

def oracle_automaton_rooted(p: RootedProblem, subset) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(subset)
    for s, cs in p.constraints:
        if s in subset and all(c in subset for c in cs):
            for c in cs:
                g.add_edge(s, c)
    return g


def oracle_automaton_unrooted(p: UnrootedProblem, configs) -> nx.DiGraph:
    g = nx.DiGraph()
    for cf in configs:
        for i, j in itertools.permutations(range(len(cf)), 2):
            g.add_node((cf[i], cf[j]))
    edges = {tuple(sorted(e)) for e in p.edge_configs}
    for a in list(g.nodes):
        for b in list(g.nodes):
            if tuple(sorted((a[1], b[0]))) in edges:
                g.add_edge(a, b)
    return g


def is_flexible(g: nx.DiGraph, comp) -> bool:
    """All-pairs walks of every length in [K, K+m] with K=(m+1)^2, by matrix powers."""
    nodes = sorted(comp)
    m = len(nodes)
    a = nx.to_numpy_array(g.subgraph(nodes), nodelist=nodes, dtype=np.int64) > 0
    if not a.any():
        return False
    k = (m + 1) ** 2
    power = np.eye(m, dtype=bool)
    base = a.copy()
    e = k
    while e:  # boolean fast exponentiation
        if e & 1:
            power = (power.astype(np.int64) @ base.astype(np.int64)) > 0
        base = (base.astype(np.int64) @ base.astype(np.int64)) > 0
        e >>= 1
    for _ in range(m + 1):
        if not power.all():
            return False
        power = (power.astype(np.int64) @ a.astype(np.int64)) > 0
    return True


def oracle_flex_rooted(p: RootedProblem, subset) -> set[frozenset]:
    g = oracle_automaton_rooted(p, frozenset(subset))
    return {frozenset(c) for c in nx.strongly_connected_components(g) if is_flexible(g, c)}


def oracle_flex_unrooted(p: UnrootedProblem, configs) -> set[frozenset]:
    g = oracle_automaton_unrooted(p, configs)
    out = set()
    for comp in nx.strongly_connected_components(g):
        if not is_flexible(g, comp):
            continue
        d = frozenset(tuple(sorted(s)) for s in comp)
        lifted = {s for s in g.nodes if tuple(sorted(s)) in d}
        if lifted == set(comp):
            out.add(d)
    return out


# --- depth by enumerating good sequences ----------------------------------------------

def oracle_restrict_configs(configs, d_set) -> frozenset:
    """Node configurations all of whose label pairs lie in ``d_set``."""
    out = []
    for cf in configs:
        pairs = {tuple(sorted((cf[i], cf[j]))) for i, j in itertools.combinations(range(len(cf)), 2)}
        if pairs <= set(d_set):
            out.append(tuple(cf))
    return frozenset(out)


def naive_depth(p) -> float:
    """Longest good sequence; reaching the cap means sequences of every length exist.

    Rooted cap |Σ|+1 and unrooted cap |𝒱|+1: within that many steps two
    consecutive chosen sets coincide and the sequence can repeat forever.
    """
    if isinstance(p, RootedProblem):
        cap = p.n_labels + 1

        def longest(prev_c: frozenset, length: int) -> int:
            r = oracle_trim_rooted(p, prev_c)
            if not r:
                return length
            best = length + 1
            if best >= cap:
                return cap
            for comp in oracle_flex_rooted(p, r):
                best = max(best, longest(comp, length + 1))
                if best >= cap:
                    return cap
            return best

        got = longest(frozenset(range(p.n_labels)), 0)
        return INF if got >= cap else got

    cap = len(p.node_configs) + 1

    def longest_u(v_prev: frozenset, d_set, length: int) -> int:
        v_cur = oracle_trim_unrooted(p, oracle_restrict_configs(v_prev, d_set))
        if not v_cur:
            return length
        best = length + 1
        if best >= cap:
            return cap
        for d in oracle_flex_unrooted(p, v_cur):
            best = max(best, longest_u(v_cur, d, length + 1))
            if best >= cap:
                return cap
        return best

    all_pairs = frozenset(itertools.combinations_with_replacement(range(p.n_labels), 2))
    got = longest_u(frozenset(p.node_configs), all_pairs, 0)
    return INF if got >= cap else got


# --- trees -------------------------------------------------------------------------

def oracle_skeleton(adj, tau: int) -> set[int]:
    g = nx.Graph()
    g.add_nodes_from(range(len(adj)))
    g.add_edges_from((v, w) for v in range(len(adj)) for w in adj[v] if v < w)
    for _ in range(tau):
        g.remove_nodes_from([v for v, d in g.degree() if d <= 1])
    return set(g.nodes)


def random_tree_parent(rng: np.random.Generator, n: int) -> np.ndarray:
    parent = np.full(n, -1, dtype=np.int64)
    for v in range(1, n):
        parent[v] = rng.integers(0, v)
    return parent


def rooted_lb_count(delta: int, beta: int, k: int, t: int) -> int:
    """Node count by direct recursion over the part definitions."""
    s = 4 * t + 4

    def tb():
        return sum(delta ** j for j in range(beta + 1))

    def g_r(i):
        if i == 1:
            return tb()
        return tb() + delta ** beta * delta * g_c(i - 1)

    def g_c_open(i):
        return s * (1 + (delta - 1) * g_r(i))

    def g_c(i):
        return g_c_open(i) + g_r(i)

    return sum(g_c_open(i) for i in range(1, k + 1)) + g_r(k + 1)


def unrooted_lb_count(delta: int, gamma: int, k: int, t: int) -> int:
    s = 4 * t + 4
    t_nodes = 1 + sum((delta - 1) ** j for j in range(1, gamma + 1))
    t_leaves = (delta - 1) ** gamma
    star_nodes = 1 + sum(delta * (delta - 1) ** (j - 1) for j in range(1, gamma + 1))
    star_leaves = delta * (delta - 1) ** (gamma - 1)

    def g_r(i):
        return t_nodes if i == 1 else t_nodes + t_leaves * (delta - 1) * g_c(i - 1)

    def g_c(i):
        return s + (s - 1) * (delta - 2) * g_r(i) + (delta - 1) * g_r(i)

    return star_nodes + star_leaves * (delta - 1) * g_c(k)
