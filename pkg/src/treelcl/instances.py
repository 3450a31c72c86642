"""Lower-bound instance families, adversarial schedules and node subsets.

Three generators live here:

* chunk instances: (|Σ|+1) chunks of complete Δ-ary trees of height 2d with
  one hidden attachment choice (b, u, C);
* the layered rooted lower-bound tree built from core paths of s = 4t+4
  nodes and complete trees T_β;
* its unrooted counterpart built from T_γ and T*_γ.

Construction works on small "parts" (parent arrays with annotations) that are
replicated with numpy, so instances with a few hundred thousand nodes build
quickly. Node ids follow construction order and every parent id is smaller
than its children's ids.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .rng import derive_rng
from .trees import Tree, layer_code, layered_parents

__all__ = [
    "ChunkInstance",
    "chunk_node_count",
    "choice_count",
    "build_chunk_instance",
    "enumerate_choices",
    "build_lb_rooted",
    "build_lb_unrooted",
    "lb_rooted_size",
    "lb_unrooted_size",
    "Schedule",
    "sample_schedule_rooted",
    "sample_schedule_unrooted",
    "NodeSubsets",
    "node_subsets",
]


# --- chunk instances ------------------------------------------------------------

def chunk_node_count(sigma_size: int, delta: int, d: int) -> int:
    """Nodes before any identification: (|Σ|+1)·Δ^{d+1}·(Δ^{2d+1}-1)/(Δ-1)."""
    return (sigma_size + 1) * delta ** (d + 1) * (delta ** (2 * d + 1) - 1) // (delta - 1)


def choice_count(sigma_size: int, delta: int, d: int) -> int:
    return 2 * sigma_size * (sigma_size + 1) * delta ** (2 * d + 1)


@dataclass(frozen=True, eq=False)
class ChunkInstance:
    tree: Tree
    middle_nodes: np.ndarray
    choice: tuple[int, int, int]


def _check_chunk_params(sigma_size: int, delta: int, d: int, check_depth: bool):
    if sigma_size < 1 or delta < 2 or d < 1:
        raise ValueError("need sigma_size >= 1, delta >= 2, d >= 1")
    if check_depth and not delta ** d > 2 * sigma_size:
        raise ValueError(f"d={d} must exceed log_{delta}(2*{sigma_size})")


def build_chunk_instance(sigma_size: int, delta: int, d: int, choice, *, check_depth: bool = True) -> ChunkInstance:
    """Chunk instance for the attachment choice ``(b, u, C)``.

    ``u`` indexes the middle nodes (depth d in their chunk tree) chunk-major,
    tree-minor. With b=1 every tree of chunk C hangs below a leaf descendant
    of u (Δ per leaf). With b=0 the roots of the first Δ^d trees of chunk C
    are merged into u's leaf descendants, in depth-first leaf order.
    """
    _check_chunk_params(sigma_size, delta, d, check_depth)
    b, u, C = (int(x) for x in choice)
    per_chunk = delta ** (d + 1)
    n_trees = (sigma_size + 1) * per_chunk
    mids_per_tree = delta ** d
    if b not in (0, 1):
        raise ValueError("b must be 0 or 1")
    if not 0 <= C <= sigma_size:
        raise ValueError(f"chunk index C={C} out of range")
    if not 0 <= u < n_trees * mids_per_tree:
        raise ValueError(f"middle node index u={u} out of range")
    u_tree = u // mids_per_tree
    if u_tree // per_chunk == C:
        raise ValueError("u must lie outside chunk C")

    local_parent, levels = layered_parents([delta] * (2 * d))
    npt = len(local_parent)
    offs = np.repeat(np.arange(n_trees, dtype=np.int64) * npt, npt)
    parent = np.tile(local_parent, n_trees) + offs
    parent[np.tile(local_parent < 0, n_trees)] = -1
    chunk = np.repeat(np.arange(n_trees) // per_chunk, npt)

    mid_local = levels[d]
    middle = (np.arange(n_trees)[:, None] * npt + mid_local[None, :]).ravel()
    u_node = int(middle[u])
    lo = hi = int(u_node - u_tree * npt)
    for _ in range(d):
        lo, hi = lo * delta + 1, hi * delta + delta
    leaves = np.arange(lo, hi + 1) + u_tree * npt
    first_root = C * per_chunk * npt

    meta = {"generator": "chunks", "sigma": sigma_size, "delta": delta, "d": d, "b": b, "u": u, "chunk": C}
    if b == 1:
        roots = first_root + np.arange(per_chunk) * npt
        parent[roots] = np.repeat(leaves, delta)
        keep = np.ones(len(parent), dtype=bool)
    else:
        roots = first_root + np.arange(mids_per_tree) * npt
        # children of each merged root move to the matching leaf
        moved = np.isin(parent, roots)
        remap = np.zeros(len(parent), dtype=np.int64)
        remap[roots] = leaves
        parent[moved] = remap[parent[moved]]
        keep = np.ones(len(parent), dtype=bool)
        keep[roots] = False
        meta["merged"] = [[int(x), C] for x in leaves]
    new_id = np.cumsum(keep) - 1
    parent = parent[keep]
    parent = np.where(parent >= 0, new_id[np.maximum(parent, 0)], -1)
    if b == 0:
        meta["merged"] = [[int(new_id[x]), C] for x in leaves]
    tree = Tree("rooted", parent, chunk=chunk[keep], meta=meta)
    return ChunkInstance(tree, new_id[middle], (b, u, C))


def enumerate_choices(sigma_size: int, delta: int, d: int, *, check_depth: bool = True) -> list[tuple[int, int, int]]:
    _check_chunk_params(sigma_size, delta, d, check_depth)
    per_chunk_mids = delta ** (2 * d + 1)
    out = []
    for b in (0, 1):
        for u in range((sigma_size + 1) * per_chunk_mids):
            home = u // per_chunk_mids
            out.extend((b, u, C) for C in range(sigma_size + 1) if C != home)
    return out


# --- lower-bound trees ------------------------------------------------------------

@dataclass
class _Part:
    parent: np.ndarray
    layer: np.ndarray
    path_id: np.ndarray
    path_pos: np.ndarray
    path_layer: list = field(default_factory=list)
    path_main: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.parent)


def _tree_part(branching: list[int], code: int) -> tuple[_Part, np.ndarray]:
    parent, levels = layered_parents(branching)
    n = len(parent)
    part = _Part(parent, np.full(n, code), np.full(n, -1), np.full(n, 0))
    return part, levels[-1]


def _path_part(s: int, i: int, main: bool) -> _Part:
    parent = np.arange(-1, s - 1, dtype=np.int64)
    return _Part(parent, np.full(s, layer_code("C", i)), np.zeros(s, dtype=np.int64),
                 np.arange(1, s + 1), [i], [main])


def _attach(base: _Part, sub: _Part, points) -> _Part:
    """Hang one copy of ``sub`` below each node in ``points``."""
    points = np.asarray(points, dtype=np.int64)
    m, ns, nb = len(points), sub.n, base.n
    sp = np.tile(sub.parent, m) + np.repeat(nb + ns * np.arange(m, dtype=np.int64), ns)
    sp[np.tile(sub.parent < 0, m)] = points
    pid = np.tile(sub.path_id, m)
    has = pid >= 0
    k = len(sub.path_layer)
    pid[has] += np.repeat(len(base.path_layer) + k * np.arange(m, dtype=np.int64), ns)[has]
    return _Part(
        np.concatenate([base.parent, sp]),
        np.concatenate([base.layer, np.tile(sub.layer, m)]),
        np.concatenate([base.path_id, pid]),
        np.concatenate([base.path_pos, np.tile(sub.path_pos, m)]),
        base.path_layer + sub.path_layer * m,
        base.path_main + sub.path_main * m,
    )


def _join(a: _Part, b: _Part, at: int) -> _Part:
    """Put ``b`` below node ``at`` of ``a`` (b keeps its own paths)."""
    return _attach(a, b, [at])


def _to_tree(part: _Part, kind: str, meta: dict) -> Tree:
    core_path = part.path_id
    core_index = np.where(core_path >= 0, part.path_pos, -1)
    meta = dict(meta, path_layer=list(map(int, part.path_layer)), path_main=list(map(bool, part.path_main)))
    return Tree(kind, part.parent, layer=part.layer, core_path=core_path, core_index=core_index, meta=meta)


def _check_lb(delta: int, depth_param: int, k: int, t: int, min_delta: int, name: str):
    if delta < min_delta:
        raise ValueError(f"delta must be >= {min_delta}, got {delta}")
    if depth_param < 1:
        raise ValueError(f"{name} must be >= 1")
    if k < 1 or t < 1:
        raise ValueError("k and t must be >= 1")


def build_lb_rooted(delta: int, beta: int, k: int, t: int) -> Tree:
    """Layered rooted lower-bound tree.

    G_{R,1} is the complete Δ-ary tree of depth β. A core part G°_{C,i} is an
    s-node path (s = 4t+4, v_1 on top) whose nodes each carry Δ-1 copies of
    G_{R,i}; G_{C,i} adds one more copy below v_s. G_{R,i+1} hangs Δ copies
    of G_{C,i} below every leaf of a fresh depth-β tree. The result stacks
    G°_{C,1}, ..., G°_{C,k} (each v_1 below the previous v_s) above G_{R,k+1}.
    """
    _check_lb(delta, beta, k, t, 1, "beta")
    s = 4 * t + 4
    r_part, _ = _tree_part([delta] * beta, layer_code("R", 1))
    cores = []
    for i in range(1, k + 1):
        core = _attach(_path_part(s, i, True), r_part, np.repeat(np.arange(s), delta - 1))
        cores.append(core)
        c_full = _join(core, r_part, s - 1)
        c_full.path_main = [False] * len(c_full.path_main)
        top, leaves = _tree_part([delta] * beta, layer_code("R", i + 1))
        r_part = _attach(top, c_full, np.repeat(leaves, delta))
    g = cores[0]
    for i in range(1, k):
        g = _join(g, cores[i], _v_s_of_last_main(g))
    g = _join(g, r_part, _v_s_of_last_main(g))
    return _to_tree(g, "rooted", {"generator": "rooted-lb", "delta": delta, "beta": beta, "k": k, "t": t, "s": s})


def _v_s_of_last_main(part: _Part) -> int:
    pid = max(j for j, m in enumerate(part.path_main) if m)
    nodes = np.flatnonzero(part.path_id == pid)
    return int(nodes[np.argmax(part.path_pos[nodes])])


def build_lb_unrooted(delta: int, gamma: int, k: int, t: int) -> Tree:
    """Layered unrooted lower-bound tree G*_{R,k+1}.

    G_{R,1} = T_γ. G_{C,i} is an s-node path with Δ-2 copies of G_{R,i} on
    v_1..v_{s-1} and Δ-1 on v_s. G_{R,i} (i >= 2) hangs Δ-1 copies of
    G_{C,i-1} below every leaf of T_γ; the top level uses T*_γ instead.
    """
    _check_lb(delta, gamma, k, t, 2, "gamma")
    s = 4 * t + 4
    t_branch = [delta - 1] * gamma
    star_branch = [delta] + [delta - 1] * (gamma - 1)
    r_part, _ = _tree_part(t_branch, layer_code("R", 1))
    for i in range(1, k + 1):
        pts = np.concatenate([np.repeat(np.arange(s - 1), delta - 2), np.full(delta - 1, s - 1)])
        c_part = _attach(_path_part(s, i, False), r_part, pts)
        branch = star_branch if i == k else t_branch
        top, leaves = _tree_part(branch, layer_code("R", i + 1))
        r_part = _attach(top, c_part, np.repeat(leaves, delta - 1))
    return _to_tree(r_part, "unrooted", {"generator": "unrooted-lb", "delta": delta, "gamma": gamma, "k": k, "t": t, "s": s})


def lb_rooted_size(delta: int, beta: int, k: int, t: int) -> int:
    """Node count of ``build_lb_rooted`` from the size recurrence."""
    s = 4 * t + 4
    tb = sum(delta ** j for j in range(beta + 1))
    r = tb
    total = 0
    for _ in range(k):
        core = s + s * (delta - 1) * r
        total += core
        r = tb + delta ** beta * delta * (core + r)
    return total + r


def lb_unrooted_size(delta: int, gamma: int, k: int, t: int) -> int:
    s = 4 * t + 4
    t_size = sum((delta - 1) ** j for j in range(gamma + 1))
    t_leaves = (delta - 1) ** gamma
    star_size = 1 + delta * sum((delta - 1) ** j for j in range(gamma))
    star_leaves = delta * (delta - 1) ** (gamma - 1)
    r = t_size
    for i in range(1, k + 1):
        c = s + ((s - 1) * (delta - 2) + (delta - 1)) * r
        if i == k:
            return star_size + star_leaves * (delta - 1) * c
        r = t_size + t_leaves * (delta - 1) * c
    raise AssertionError


# --- schedules -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Schedule:
    """Reveal order with its special prefix.

    ``u_nodes[i-1]`` lists the special nodes of layer i, one per core path
    (for rooted trees the main path first); ``d_samples`` holds the sampled
    values per path: the distance from v_1 (rooted) or the 1-based index of
    the chosen path node (unrooted).
    """

    order: np.ndarray
    u_nodes: tuple[tuple[int, ...], ...]
    d_samples: tuple[tuple[int, ...], ...]
    seed: int
    path_ids: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        order = np.array(self.order, dtype=np.int64)
        order.setflags(write=False)
        object.__setattr__(self, "order", order)

    @property
    def prefix_length(self) -> int:
        return sum(len(x) for x in self.u_nodes)

    def to_dict(self) -> dict:
        return {
            "order": self.order.tolist(),
            "u_nodes": [list(x) for x in self.u_nodes],
            "d_samples": [list(x) for x in self.d_samples],
            "seed": str(self.seed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, obj: dict) -> "Schedule":
        return cls(
            np.asarray(obj["order"], dtype=np.int64),
            tuple(tuple(int(v) for v in x) for x in obj.get("u_nodes", [])),
            tuple(tuple(int(v) for v in x) for x in obj.get("d_samples", [])),
            int(obj.get("seed", 0)),
        )

    @classmethod
    def from_json(cls, text: str) -> "Schedule":
        return cls.from_dict(json.loads(text))


def _layer_paths(g: Tree, i: int) -> list[int]:
    layers = g.meta["path_layer"]
    mains = g.meta.get("path_main", [False] * len(layers))
    ids = [j for j, lay in enumerate(layers) if lay == i]
    return sorted(ids, key=lambda j: (not mains[j], j))


def _check_schedule_input(g: Tree, t: int, generator: str):
    if g.meta.get("generator") != generator:
        raise ValueError(f"schedule needs a tree built by {generator}")
    if g.meta.get("t") != t:
        raise ValueError(f"tree was built for t={g.meta.get('t')}, not t={t}")


def _finish_schedule(g: Tree, groups, ds, pids, seed: int) -> Schedule:
    prefix = []
    for i, nodes in enumerate(groups, start=1):
        perm = derive_rng(seed, "permute-layer", i).permutation(len(nodes))
        prefix.extend(nodes[j] for j in perm)
    special = np.zeros(g.n, dtype=bool)
    special[prefix] = True
    rest = [v for v in g.order if not special[v]]
    return Schedule(np.array(prefix + rest, dtype=np.int64), tuple(map(tuple, groups)),
                    tuple(map(tuple, ds)), seed, tuple(map(tuple, pids)))


def sample_schedule_rooted(g: Tree, t: int, seed: int) -> Schedule:
    """Adversarial order for the rooted lower-bound tree.

    On every core path of layer i a distance d ∈ {2t+1, 2t+2} from v_1 is
    drawn uniformly and the node at that distance becomes u. The u-nodes of
    each layer are revealed first, layer by layer, in uniformly random order;
    all other nodes follow in breadth-first order.
    """
    _check_schedule_input(g, t, "rooted-lb")
    s = g.meta["s"]
    paths = g.paths
    groups, ds, pids = [], [], []
    for i in range(1, g.meta["k"] + 1):
        ids = _layer_paths(g, i)
        draws = derive_rng(seed, "distance", i).integers(0, 2, size=len(ids)) + 2 * t + 1
        us = []
        for pid, d in zip(ids, draws):
            d = int(d)
            if not (d >= 2 * t + 1 and s - 1 - d >= 2 * t + 1):
                raise AssertionError("u-node too close to a path end")
            us.append(int(paths[pid][d]))
        groups.append(us)
        ds.append([int(x) for x in draws])
        pids.append(ids)
    return _finish_schedule(g, groups, ds, pids, seed)


def sample_schedule_unrooted(g: Tree, t: int, seed: int) -> Schedule:
    """Adversarial order for the unrooted tree: v_{2t+1} or v_{2t+2} per core path."""
    _check_schedule_input(g, t, "unrooted-lb")
    paths = g.paths
    groups, ds, pids = [], [], []
    for i in range(1, g.meta["k"] + 1):
        ids = _layer_paths(g, i)
        idx = derive_rng(seed, "path-node", i).integers(0, 2, size=len(ids)) + 2 * t + 1
        groups.append([int(paths[pid][j - 1]) for pid, j in zip(ids, idx)])
        ds.append([int(x) for x in idx])
        pids.append(ids)
    return _finish_schedule(g, groups, ds, pids, seed)


# --- node subsets ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NodeSubsets:
    """Boolean membership arrays of the diagnostic subsets.

    ``R[i]`` and ``C[i]`` are S_{R,i} and S_{C,i} (primed sets for rooted
    trees); ``U[i]`` lists the layer-i special nodes.
    """

    R: dict
    C: dict
    U: dict

    def chain(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i in sorted(self.R):
            out.append((f"R{i}", self.R[i]))
            if i in self.C:
                out.append((f"C{i}", self.C[i]))
        return out


def _levels(g: Tree) -> list[np.ndarray]:
    depth = g.depth
    order = np.argsort(depth, kind="stable")
    cuts = np.searchsorted(depth[order], np.arange(1, depth.max() + 1)) if g.n else []
    return np.split(order, cuts)


def _complete_depth(g: Tree, member: np.ndarray, cap: int) -> np.ndarray:
    """Depth of the largest complete descendant ball inside ``member`` (-1 outside)."""
    big = cap + 1
    minchild = np.full(g.n, big, dtype=np.int64)
    val = np.full(g.n, -1, dtype=np.int64)
    leaf = g.child_counts == 0
    for nodes in reversed(_levels(g)):
        v = np.where(leaf[nodes], 0, np.minimum(1 + minchild[nodes], big))
        v = np.where(member[nodes], v, -1)
        val[nodes] = v
        par = g.parent[nodes]
        has = par >= 0
        np.minimum.at(minchild, par[has], v[has])
    return val


def _rank_of(i_kind: str, i: int) -> int:
    return layer_code(i_kind, i)


def _rooted_subsets(g: Tree, sched: Schedule) -> NodeSubsets:
    beta, k = g.meta["beta"], g.meta["k"]
    paths = g.paths
    mains = g.meta["path_main"]
    pos = g.core_index
    R = {1: _complete_depth(g, np.ones(g.n, dtype=bool), beta) >= beta}
    C = {}
    for i in range(1, k + 1):
        member = g.layer >= _rank_of("R", i + 1)
        for pid, u in zip(sched.path_ids[i - 1], sched.u_nodes[i - 1]):
            nodes = paths[pid]
            if mains[pid]:
                member[nodes[pos[nodes] >= pos[u]]] = True
            else:
                member[nodes[pos[nodes] <= pos[u]]] = True
        C[i] = member
        R[i + 1] = _complete_depth(g, member, beta) >= beta
    U = {i: np.array(x) for i, x in enumerate(sched.u_nodes, start=1)}
    return NodeSubsets(R, C, U)


def _multi_source_distance(adj, sources: np.ndarray) -> np.ndarray:
    n = len(adj)
    dist = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
    queue = deque(np.flatnonzero(sources).tolist())
    for v in queue:
        dist[v] = 0
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if dist[w] > dist[v] + 1:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def _steiner(g: Tree, terminals) -> np.ndarray:
    """Nodes on some path between two terminals (plus the terminals)."""
    term = np.zeros(g.n, dtype=bool)
    term[list(terminals)] = True
    total = int(term.sum())
    cnt = term.astype(np.int64)
    par = g.parent
    for v in reversed(g.order):
        if par[v] >= 0:
            cnt[par[v]] += cnt[v]
    out = term.copy()
    kids = g.children
    for v in range(g.n):
        dirs = sum(1 for c in kids[v] if cnt[c] > 0) + (total - cnt[v] > 0)
        if dirs >= 2:
            out[v] = True
    return out


def _unrooted_subsets(g: Tree, sched: Schedule) -> NodeSubsets:
    gamma, k, delta = g.meta["gamma"], g.meta["k"], g.meta["delta"]
    adj = g.adjacency
    d_leaf = _multi_source_distance(adj, g.degrees != delta)
    R = {1: d_leaf >= gamma}
    C = {}
    for i in range(1, k + 1):
        member = _steiner(g, sched.u_nodes[i - 1])
        C[i] = member
        d_out = _multi_source_distance(adj, ~member)
        R[i + 1] = member & (d_out >= gamma + 1) & (d_leaf >= gamma)
    U = {i: np.array(x) for i, x in enumerate(sched.u_nodes, start=1)}
    return NodeSubsets(R, C, U)


def node_subsets(g: Tree, sched: Schedule) -> NodeSubsets:
    """Subset family used by the lower-bound argument, as membership arrays.

    Rooted trees: S'_{R,1} holds nodes whose depth-β descendant ball is a
    complete Δ-ary tree; S'_{C,i} holds layers from (R,i+1) on, the main
    path from u_0 downwards and every other layer-i path from v_1 down to
    its u-node; S'_{R,i+1} requires a complete depth-β ball inside S'_{C,i}.
    Unrooted trees: S_{R,1} holds nodes whose radius-γ ball is T*_γ;
    S_{C,i} is the union of paths between layer-i special nodes;
    S_{R,i+1} requires a T*_γ ball inside S_{C,i}.
    """
    if not sched.path_ids:
        raise ValueError("schedule lacks path ids; sample it from the tree")
    if g.meta.get("generator") == "rooted-lb":
        return _rooted_subsets(g, sched)
    if g.meta.get("generator") == "unrooted-lb":
        return _unrooted_subsets(g, sched)
    raise ValueError("node subsets are defined for lower-bound trees only")
