"""LCL problems on regular trees.

Two formalisms are supported:

* ``RootedProblem``: node constraints ``(parent label, multiset of Δ child
  labels)``. Only nodes with exactly Δ children are constrained.
* ``UnrootedProblem``: labels live on half-edges. Every degree-Δ node must see
  an allowed multiset of Δ labels and every edge an allowed pair.

Labels are interned to dense integer ids in declaration order and every
multiset is stored as a sorted tuple, so problems hash and compare
canonically.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Union

__all__ = [
    "ProblemError",
    "ProblemSyntaxError",
    "RootedProblem",
    "UnrootedProblem",
    "Problem",
    "parse_problem",
    "load_problem",
    "serialize_problem",
    "problem_to_dict",
    "problem_from_dict",
    "restrict_rooted",
    "restrict_unrooted",
    "sub_pairs",
    "all_pairs",
    "multisets",
]


class ProblemError(ValueError):
    """Malformed or inconsistent problem description."""


class ProblemSyntaxError(ProblemError):
    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"{msg} (line {line}, column {column})")
        self.line = line
        self.column = column


Config = tuple[int, ...]
Pair = tuple[int, int]


def multisets(n_labels: int, size: int) -> list[Config]:
    """All sorted multisets of ``size`` label ids drawn from ``range(n_labels)``."""
    return list(itertools.combinations_with_replacement(range(n_labels), size))


def all_pairs(n_labels: int) -> frozenset[Pair]:
    return frozenset(multisets(n_labels, 2))


def sub_pairs(config: Iterable[int]) -> frozenset[Pair]:
    """Size-2 sub-multisets of a configuration (as sorted pairs)."""
    c = sorted(config)
    return frozenset((c[i], c[j]) for i in range(len(c)) for j in range(i + 1, len(c)))


def _check_labels(labels) -> tuple[str, ...]:
    labels = tuple(labels)
    if not labels:
        raise ProblemError("label set must be non-empty")
    for name in labels:
        if not isinstance(name, str) or not name:
            raise ProblemError(f"label names must be non-empty strings, got {name!r}")
    if len(set(labels)) != len(labels):
        raise ProblemError("label names must be unique")
    return labels


def _check_ids(ids, n: int, what: str):
    for x in ids:
        if not isinstance(x, int) or not 0 <= x < n:
            raise ProblemError(f"{what}: label id {x!r} out of range")


@dataclass(frozen=True)
class RootedProblem:
    """Π = (Δ, Σ, 𝒱) on rooted trees.

    ``allowed`` is the label mask left by a restriction (``None`` means all
    labels). The label universe itself never shrinks, so ids stay stable.
    """

    delta: int
    labels: tuple[str, ...]
    constraints: tuple[tuple[int, Config], ...]
    allowed: frozenset[int] | None = None

    def __post_init__(self):
        if not isinstance(self.delta, int) or self.delta < 1:
            raise ProblemError(f"delta must be an integer >= 1, got {self.delta!r}")
        labels = _check_labels(self.labels)
        n = len(labels)
        canon = set()
        for parent, children in self.constraints:
            children = tuple(sorted(children))
            if len(children) != self.delta:
                raise ProblemError(
                    f"configuration for parent {parent} has {len(children)} children, expected {self.delta}")
            _check_ids((parent, *children), n, "constraint")
            canon.add((parent, children))
        allowed = self.allowed
        if allowed is not None:
            allowed = frozenset(allowed)
            _check_ids(allowed, n, "allowed set")
            if len(allowed) == n:
                allowed = None
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "constraints", tuple(sorted(canon)))
        object.__setattr__(self, "allowed", allowed)

    kind = "rooted"

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    @property
    def label_ids(self) -> frozenset[int]:
        return frozenset(range(self.n_labels)) if self.allowed is None else self.allowed

    def label_id(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ProblemError(f"unknown label {name!r}") from None

    @cached_property
    def _index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.labels)}

    @cached_property
    def by_parent(self) -> dict[int, tuple[Config, ...]]:
        """Child configurations allowed under each parent label."""
        out: dict[int, list[Config]] = {i: [] for i in range(self.n_labels)}
        for parent, children in self.constraints:
            out[parent].append(children)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def constraint_set(self) -> frozenset[tuple[int, Config]]:
        return frozenset(self.constraints)

    def names(self, ids: Iterable[int]) -> list[str]:
        return [self.labels[i] for i in sorted(ids)]


@dataclass(frozen=True)
class UnrootedProblem:
    """Π = (Δ, Σ, 𝒱, ℰ) on unrooted trees with half-edge labels."""

    delta: int
    labels: tuple[str, ...]
    node_configs: tuple[Config, ...]
    edge_configs: tuple[Pair, ...]
    allowed_pairs: frozenset[Pair] | None = None

    def __post_init__(self):
        if not isinstance(self.delta, int) or self.delta < 2:
            raise ProblemError(f"delta must be an integer >= 2 for unrooted problems, got {self.delta!r}")
        labels = _check_labels(self.labels)
        n = len(labels)
        nodes = set()
        for c in self.node_configs:
            c = tuple(sorted(c))
            if len(c) != self.delta:
                raise ProblemError(f"node configuration {c} has arity {len(c)}, expected {self.delta}")
            _check_ids(c, n, "node configuration")
            nodes.add(c)
        edges = set()
        for e in self.edge_configs:
            e = tuple(sorted(e))
            if len(e) != 2:
                raise ProblemError(f"edge configuration {e} must have exactly 2 labels")
            _check_ids(e, n, "edge configuration")
            edges.add(e)
        mask = self.allowed_pairs
        if mask is not None:
            mask = frozenset(tuple(sorted(p)) for p in mask)
            if mask >= all_pairs(n):
                mask = None
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "node_configs", tuple(sorted(nodes)))
        object.__setattr__(self, "edge_configs", tuple(sorted(edges)))
        object.__setattr__(self, "allowed_pairs", mask)

    kind = "unrooted"

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def label_id(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ProblemError(f"unknown label {name!r}") from None

    @cached_property
    def _index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.labels)}

    @cached_property
    def edge_set(self) -> frozenset[Pair]:
        return frozenset(self.edge_configs)

    @cached_property
    def partners(self) -> dict[int, frozenset[int]]:
        """For each label x, the labels y with {x, y} ∈ ℰ."""
        out: dict[int, set[int]] = {i: set() for i in range(self.n_labels)}
        for a, b in self.edge_configs:
            out[a].add(b)
            out[b].add(a)
        return {k: frozenset(v) for k, v in out.items()}


Problem = Union[RootedProblem, UnrootedProblem]


def restrict_rooted(p: RootedProblem, sigma_sub: Iterable[int]) -> RootedProblem:
    """Keep exactly the constraints (σ, S) with σ and all of S inside ``sigma_sub``."""
    keep = frozenset(sigma_sub)
    kept = tuple((s, c) for s, c in p.constraints if s in keep and keep.issuperset(c))
    return RootedProblem(p.delta, p.labels, kept, allowed=keep & p.label_ids)


def restrict_unrooted(p: UnrootedProblem, d_set: Iterable[Pair]) -> UnrootedProblem:
    """Keep the node configurations all of whose size-2 sub-multisets are in ``d_set``."""
    keep = frozenset(tuple(sorted(x)) for x in d_set)
    kept = tuple(c for c in p.node_configs if sub_pairs(c) <= keep)
    mask = keep if p.allowed_pairs is None else keep & p.allowed_pairs
    return UnrootedProblem(p.delta, p.labels, kept, p.edge_configs, allowed_pairs=mask)


# --- file format ---------------------------------------------------------------

def problem_to_dict(p: Problem) -> dict:
    if isinstance(p, RootedProblem):
        out = {
            "kind": "rooted",
            "delta": p.delta,
            "labels": list(p.labels),
            "configurations": [
                {"parent": p.labels[s], "children": [p.labels[c] for c in cs]}
                for s, cs in p.constraints
            ],
        }
        if p.allowed is not None:
            out["allowed"] = p.names(p.allowed)
        return out
    out = {
        "kind": "unrooted",
        "delta": p.delta,
        "labels": list(p.labels),
        "node_configs": [[p.labels[x] for x in c] for c in p.node_configs],
        "edge_configs": [[p.labels[x] for x in e] for e in p.edge_configs],
    }
    if p.allowed_pairs is not None:
        out["allowed_pairs"] = [[p.labels[x] for x in e] for e in sorted(p.allowed_pairs)]
    return out


def serialize_problem(p: Problem) -> str:
    """Canonical JSON text: sorted children, sorted configurations, fixed layout."""
    return json.dumps(problem_to_dict(p), indent=2, ensure_ascii=False) + "\n"


def _dedupe(items: list, what: str, normalize: bool) -> list:
    seen, out, dups = set(), [], []
    for item in items:
        if item in seen:
            dups.append(item)
            continue
        seen.add(item)
        out.append(item)
    if dups:
        if not normalize:
            raise ProblemError(f"duplicate {what}: {dups[0]!r} (enable normalization to drop duplicates)")
        warnings.warn(f"dropped {len(dups)} duplicate {what}", stacklevel=3)
    return out


def _ids(names, index: dict[str, int], where: str) -> tuple[int, ...]:
    if not isinstance(names, list):
        raise ProblemError(f"{where}: expected a list of label names")
    out = []
    for name in names:
        if name not in index:
            raise ProblemError(f"{where}: unknown label {name!r}")
        out.append(index[name])
    return tuple(sorted(out))


def problem_from_dict(obj, *, normalize: bool = False) -> Problem:
    if not isinstance(obj, dict):
        raise ProblemError("problem file must contain a JSON object")
    kind = obj.get("kind")
    if kind not in ("rooted", "unrooted"):
        raise ProblemError(f"'kind' must be 'rooted' or 'unrooted', got {kind!r}")
    delta = obj.get("delta")
    if isinstance(delta, bool) or not isinstance(delta, int):
        raise ProblemError("'delta' must be an integer")
    if delta < 1:
        raise ProblemError(f"'delta' must be >= 1, got {delta}")
    labels = obj.get("labels")
    if not isinstance(labels, list):
        raise ProblemError("'labels' must be a list")
    labels = _check_labels(labels)
    index = {name: i for i, name in enumerate(labels)}

    if kind == "rooted":
        raw = obj.get("configurations", [])
        if not isinstance(raw, list):
            raise ProblemError("'configurations' must be a list")
        cons = []
        for i, entry in enumerate(raw):
            where = f"configurations[{i}]"
            if not isinstance(entry, dict) or "parent" not in entry or "children" not in entry:
                raise ProblemError(f"{where}: expected an object with 'parent' and 'children'")
            parent = entry["parent"]
            if parent not in index:
                raise ProblemError(f"{where}: unknown label {parent!r}")
            children = _ids(entry["children"], index, where)
            if len(children) != delta:
                raise ProblemError(f"{where}: arity {len(children)} but delta is {delta}")
            cons.append((index[parent], children))
        cons = _dedupe(cons, "configuration", normalize)
        allowed = None
        if "allowed" in obj:
            allowed = frozenset(_ids(obj["allowed"], index, "allowed"))
        return RootedProblem(delta, labels, tuple(cons), allowed=allowed)

    if delta < 2:
        raise ProblemError(f"unrooted problems need delta >= 2, got {delta}")
    nodes = []
    for i, entry in enumerate(obj.get("node_configs", [])):
        c = _ids(entry, index, f"node_configs[{i}]")
        if len(c) != delta:
            raise ProblemError(f"node_configs[{i}]: arity {len(c)} but delta is {delta}")
        nodes.append(c)
    edges = []
    for i, entry in enumerate(obj.get("edge_configs", [])):
        e = _ids(entry, index, f"edge_configs[{i}]")
        if len(e) != 2:
            raise ProblemError(f"edge_configs[{i}]: edge configurations have exactly 2 labels")
        edges.append(e)
    nodes = _dedupe(nodes, "node configuration", normalize)
    edges = _dedupe(edges, "edge configuration", normalize)
    mask = None
    if "allowed_pairs" in obj:
        mask = frozenset(_ids(e, index, "allowed_pairs") for e in obj["allowed_pairs"])
    return UnrootedProblem(delta, labels, tuple(nodes), tuple(edges), allowed_pairs=mask)


def parse_problem(text: str, *, normalize: bool = False) -> Problem:
    """Parse a problem file.

    Parameters
    ----------
    text : str
        JSON content (see README for the format).
    normalize : bool
        Drop duplicate entries with a warning instead of rejecting them.

    Raises
    ------
    ProblemSyntaxError
        Invalid JSON; carries the line and column.
    ProblemError
        Unknown labels, wrong arity, bad delta, empty label set.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    return problem_from_dict(obj, normalize=normalize)


def load_problem(path, *, normalize: bool = False) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read(), normalize=normalize)
