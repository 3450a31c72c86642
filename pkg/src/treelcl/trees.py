"""Tree container, complete trees, leaf peeling and path ruling sets."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

__all__ = [
    "Tree",
    "DELTA_ARY",
    "T",
    "T_STAR",
    "complete_tree",
    "layered_parents",
    "layer_name",
    "layer_code",
    "skeleton_tree",
    "RulingSet",
    "path_ruling_set",
]

DELTA_ARY = "delta-ary"
T = "T"
T_STAR = "T*"


def layer_code(kind: str, i: int) -> int:
    """Layers are ordered (R,1) < (C,1) < (R,2) < ..."""
    return 2 * i - 2 if kind == "R" else 2 * i - 1


def layer_name(code: int) -> str | None:
    if code < 0:
        return None
    return f"R{code // 2 + 1}" if code % 2 == 0 else f"C{code // 2 + 1}"


def _parse_layer(name) -> int:
    if name is None:
        return -1
    return layer_code(name[0], int(name[1:]))


def _readonly(a) -> np.ndarray | None:
    if a is None:
        return None
    a = np.array(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Tree:
    """A rooted or unrooted tree (or forest) on nodes ``0..n-1``.

    Structure is stored as a parent array for both kinds; unrooted trees keep
    the parent array of the rooting used at construction and expose the
    undirected adjacency. Annotation arrays are optional sidecars: ``layer``
    codes (see ``layer_code``), ``core_path`` / ``core_index`` (-1 outside
    core paths, indices 1-based) and ``chunk``.
    """

    kind: str
    parent: np.ndarray
    layer: np.ndarray | None = None
    core_path: np.ndarray | None = None
    core_index: np.ndarray | None = None
    chunk: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("rooted", "unrooted"):
            raise ValueError(f"unknown tree kind {self.kind!r}")
        for name in ("parent", "layer", "core_path", "core_index", "chunk"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        n = len(self.parent)
        for name in ("layer", "core_path", "core_index", "chunk"):
            arr = getattr(self, name)
            if arr is not None and len(arr) != n:
                raise ValueError(f"annotation {name} has length {len(arr)}, expected {n}")
        if n and (self.parent.min() < -1 or self.parent.max() >= n):
            raise ValueError("parent ids out of range")

    @property
    def n(self) -> int:
        return len(self.parent)

    @cached_property
    def roots(self) -> list[int]:
        return np.flatnonzero(self.parent < 0).tolist()

    @cached_property
    def child_counts(self) -> np.ndarray:
        p = self.parent[self.parent >= 0]
        return np.bincount(p, minlength=self.n)

    @cached_property
    def degrees(self) -> np.ndarray:
        return self.child_counts + (self.parent >= 0)

    @cached_property
    def children(self) -> list[list[int]]:
        """Children of each node in increasing id order."""
        idx = np.flatnonzero(self.parent >= 0)
        par = self.parent[idx]
        order = np.argsort(par, kind="stable")
        idx, par = idx[order], par[order]
        bounds = np.searchsorted(par, np.arange(self.n + 1))
        flat = idx.tolist()
        return [flat[bounds[v]:bounds[v + 1]] for v in range(self.n)]

    @cached_property
    def adjacency(self) -> list[list[int]]:
        kids = self.children
        par = self.parent.tolist()
        return [([par[v]] if par[v] >= 0 else []) + kids[v] for v in range(self.n)]

    @cached_property
    def order(self) -> list[int]:
        """Breadth-first order from the roots (parents before children)."""
        out = []
        kids = self.children
        queue = deque(self.roots)
        while queue:
            v = queue.popleft()
            out.append(v)
            queue.extend(kids[v])
        if len(out) != self.n:
            raise ValueError("parent array contains a cycle")
        return out

    @cached_property
    def depth(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=np.int64)
        par = self.parent
        for v in self.order:
            if par[v] >= 0:
                d[v] = d[par[v]] + 1
        return d

    def edges(self) -> list[tuple[int, int]]:
        idx = np.flatnonzero(self.parent >= 0)
        return list(zip(self.parent[idx].tolist(), idx.tolist()))

    @cached_property
    def paths(self) -> list[np.ndarray]:
        """Core paths as node arrays ordered by core index (v_1 first)."""
        if self.core_path is None:
            return []
        idx = np.flatnonzero(self.core_path >= 0)
        key = np.lexsort((self.core_index[idx], self.core_path[idx]))
        idx = idx[key]
        ids = self.core_path[idx]
        cuts = np.flatnonzero(np.diff(ids)) + 1
        return np.split(idx, cuts) if len(idx) else []

    def ball(self, v: int, radius: int) -> dict[int, int]:
        """Nodes within ``radius`` of ``v`` (undirected), mapped to their distance."""
        adj = self.adjacency
        dist = {v: 0}
        frontier = [v]
        for r in range(1, radius + 1):
            nxt = []
            for u in frontier:
                for w in adj[u]:
                    if w not in dist:
                        dist[w] = r
                        nxt.append(w)
            frontier = nxt
            if not frontier:
                break
        return dist

    def check_degrees(self, delta: int) -> list[int]:
        """Nodes violating the regularity invariant for this tree kind."""
        if self.kind == "rooted":
            bad = (self.child_counts != 0) & (self.child_counts != delta)
        else:
            bad = (self.degrees != 1) & (self.degrees != delta)
            if self.n == 1:
                bad[:] = False
        return np.flatnonzero(bad).tolist()

    # --- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "n": self.n}
        if self.kind == "rooted":
            out["parent"] = self.parent.tolist()
        else:
            out["edges"] = [list(e) for e in self.edges()]
        ann = {}
        if self.layer is not None:
            ann["layer"] = [layer_name(c) for c in self.layer.tolist()]
        if self.core_path is not None:
            ann["core_path"] = self.core_path.tolist()
            ann["core_index"] = self.core_index.tolist()
        if self.chunk is not None:
            ann["chunk"] = self.chunk.tolist()
        out["annotations"] = ann
        if self.meta:
            out["meta"] = self.meta
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, obj: dict) -> "Tree":
        kind = obj.get("kind")
        n = obj.get("n")
        if kind == "rooted" or "parent" in obj:
            parent = np.asarray(obj["parent"], dtype=np.int64)
        else:
            parent = _parent_from_edges(n, obj.get("edges", []))
        if n is not None and len(parent) != n:
            raise ValueError(f"tree declares n={n} but has {len(parent)} nodes")
        ann = obj.get("annotations", {}) or {}
        layer = [_parse_layer(x) for x in ann["layer"]] if "layer" in ann else None
        core_path = ann.get("core_path")
        core_index = ann.get("core_index")
        if core_path is not None and core_index is None:
            raise ValueError("core_path annotation requires core_index")
        return cls(kind, parent, layer, core_path, core_index, ann.get("chunk"), dict(obj.get("meta", {})))

    @classmethod
    def from_json(cls, text: str) -> "Tree":
        return cls.from_dict(json.loads(text))


def _parent_from_edges(n: int, edges: Iterable) -> np.ndarray:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    parent = np.full(n, -2, dtype=np.int64)
    for r in range(n):
        if parent[r] != -2:
            continue
        parent[r] = -1
        queue = deque([r])
        while queue:
            v = queue.popleft()
            for w in sorted(adj[v]):
                if parent[w] == -2:
                    parent[w] = v
                    queue.append(w)
                elif w != parent[v]:
                    raise ValueError("edge list contains a cycle")
    return parent


def layered_parents(branching: list[int]) -> tuple[np.ndarray, list[np.ndarray]]:
    """Parent array of a tree where every node on level l has ``branching[l]`` children.

    Nodes are numbered level by level; returns the parent array and the node
    ids of each level.
    """
    parents = [np.array([-1], dtype=np.int64)]
    levels = [np.array([0], dtype=np.int64)]
    nxt = 1
    for b in branching:
        prev = levels[-1]
        par = np.repeat(prev, b)
        ids = np.arange(nxt, nxt + len(par), dtype=np.int64)
        nxt += len(par)
        parents.append(par)
        levels.append(ids)
    return np.concatenate(parents), levels


def complete_tree(delta: int, depth: int, kind: str = DELTA_ARY) -> Tree:
    """Complete tree of the given depth.

    ``DELTA_ARY``: every internal node has Δ children (rooted).
    ``T``: root and internal nodes have Δ-1 children, so internal degree is Δ.
    ``T_STAR``: like ``T`` but the root has Δ children.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if kind == DELTA_ARY:
        if delta < 1:
            raise ValueError("delta must be >= 1")
        branching = [delta] * depth
        tkind = "rooted"
    elif kind in (T, T_STAR):
        if delta < 2:
            raise ValueError("delta must be >= 2 for T and T*")
        first = delta if kind == T_STAR else delta - 1
        branching = [first] + [delta - 1] * (depth - 1) if depth else []
        tkind = "unrooted"
    else:
        raise ValueError(f"unknown complete-tree kind {kind!r}")
    parent, _ = layered_parents(branching)
    return Tree(tkind, parent, meta={"generator": "complete-tree", "delta": delta, "depth": depth, "tree_kind": kind})


# --- skeleton and ruling sets ------------------------------------------------

def peel_rounds(adj: list[list[int]]) -> np.ndarray:
    """Round (1-based) in which each node is removed by repeated leaf deletion.

    In every round all nodes of current degree <= 1 are deleted at once.
    """
    n = len(adj)
    deg = np.array([len(a) for a in adj], dtype=np.int64)
    rnd = np.zeros(n, dtype=np.int64)
    current = [v for v in range(n) if deg[v] <= 1]
    for v in current:
        rnd[v] = 1
    r = 1
    while current:
        nxt = []
        for v in current:
            for w in adj[v]:
                if rnd[w] == 0:
                    deg[w] -= 1
                    if deg[w] <= 1:
                        rnd[w] = r + 1
                        nxt.append(w)
        current = nxt
        r += 1
    return rnd


def skeleton_tree(t: Tree, tau: int) -> tuple[Tree, np.ndarray]:
    """Remove all leaves ``tau`` times.

    Returns the surviving tree (unrooted, relabelled ``0..m-1``) and ψ, the
    array mapping each surviving node to its original id.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if tau == 0:
        return Tree("unrooted", t.parent, meta=dict(t.meta)), np.arange(t.n)
    rnd = peel_rounds(t.adjacency)
    psi = np.flatnonzero(rnd > tau)
    new_id = np.full(t.n, -1, dtype=np.int64)
    new_id[psi] = np.arange(len(psi))
    old_parent = t.parent[psi]
    parent = np.where(old_parent >= 0, new_id[np.maximum(old_parent, 0)], -1)
    return Tree("unrooted", parent, meta={"skeleton_of": t.meta, "tau": tau}), psi


@dataclass(frozen=True)
class RulingSet:
    ruling: tuple[int, ...]
    segments: tuple[tuple[int, ...], ...]
    paths: tuple[tuple[int, ...], ...]


def _degree_two_paths(adj: list[list[int]]) -> list[list[int]]:
    """Components left after deleting nodes of degree > 2, each walked from its smaller endpoint."""
    n = len(adj)
    keep = [len(a) <= 2 for a in adj]
    sub = [[w for w in adj[v] if keep[w]] if keep[v] else [] for v in range(n)]
    seen = [False] * n
    paths = []
    for v in range(n):
        if not keep[v] or seen[v] or len(sub[v]) == 2:
            continue
        # v is an endpoint; collect its path and restart from the smaller end
        walk, prev, cur = [], -1, v
        while cur != -1:
            walk.append(cur)
            nxt = -1
            for w in sub[cur]:
                if w != prev:
                    nxt = w
            prev, cur = cur, nxt
        for u in walk:
            seen[u] = True
        if walk[-1] < walk[0]:
            walk.reverse()
        paths.append(walk)
    return sorted(paths)


def path_ruling_set(t_skel: Tree, c: int) -> RulingSet:
    """(c+1, c) ruling set on the degree <= 2 parts of a tree.

    Nodes of degree above two are removed; each remaining path gets ruling
    nodes at positions c, 2c+1, 3c+2, ... from its canonical endpoint (a
    single node at the far end if the path is shorter than c+1). Removing
    them splits the path into segments; segments with fewer than c nodes are
    discarded, so every kept segment has between c and 2c nodes.
    """
    if c < 1:
        raise ValueError("c must be >= 1")
    ruling, segments = [], []
    paths = _degree_two_paths(t_skel.adjacency)
    for path in paths:
        m = len(path)
        pos = list(range(c, m, c + 1)) if m > c else [m - 1]
        ruling.extend(path[i] for i in pos)
        cuts = [-1] + pos + [m]
        for a, b in zip(cuts, cuts[1:]):
            seg = path[a + 1:b]
            if len(seg) >= c:
                segments.append(tuple(seg))
    return RulingSet(tuple(sorted(ruling)), tuple(segments), tuple(tuple(p) for p in paths))
