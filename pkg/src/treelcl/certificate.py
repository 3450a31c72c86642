"""Coprime certificates for rooted problems.

A certificate consists of a label set Σ_T = (σ_1..σ_t), two coprime depths
d1 and d2, and for each depth a family of t correctly labeled complete Δ-ary
trees. All trees of one family share the same leaf labeling, drawn from Σ_T,
and tree i has root label σ_i.

Trees are nested tuples ``(label, (child, ...))``; leaves have no children.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from math import gcd

from .problem import RootedProblem
from .solve import Verdict, solve_rooted_forest, _assign
from .trees import DELTA_ARY, complete_tree

__all__ = [
    "Certificate",
    "CertificateNotFound",
    "BudgetExceeded",
    "verify_certificate",
    "search_certificate",
    "certificate_from_dict",
]


class BudgetExceeded(RuntimeError):
    """The certificate search used up its expansion budget."""


@dataclass(frozen=True)
class Certificate:
    sigma_t: tuple[int, ...]
    d1: int
    d2: int
    trees1: tuple
    trees2: tuple

    @property
    def leaf_pattern1(self) -> tuple[int, ...]:
        return tuple(_leaves(self.trees1[0])) if self.trees1 else ()

    @property
    def leaf_pattern2(self) -> tuple[int, ...]:
        return tuple(_leaves(self.trees2[0])) if self.trees2 else ()

    def to_dict(self, labels) -> dict:
        def nest(node):
            label, kids = node
            return [labels[label]] + [nest(c) for c in kids]

        return {
            "sigma_t": [labels[x] for x in self.sigma_t],
            "d1": self.d1,
            "d2": self.d2,
            "trees1": [nest(t) for t in self.trees1],
            "trees2": [nest(t) for t in self.trees2],
        }

    def to_json(self, labels) -> str:
        return json.dumps(self.to_dict(labels), separators=(",", ":"))


@dataclass(frozen=True)
class CertificateNotFound:
    max_depth: int
    max_sigma: int
    min_depth: int
    expansions: int

    def to_dict(self) -> dict:
        return {"status": "NOT_FOUND", "max_depth": self.max_depth, "max_sigma": self.max_sigma,
                "min_depth": self.min_depth, "expansions": self.expansions}


def certificate_from_dict(obj: dict, p: RootedProblem) -> Certificate:
    """Read a certificate; tree shapes are not validated here (see ``verify_certificate``)."""
    def unnest(node):
        if not isinstance(node, list) or not node:
            raise ValueError(f"malformed tree node {node!r}")
        return (p.label_id(node[0]), tuple(unnest(c) for c in node[1:]))

    return Certificate(
        tuple(p.label_id(x) for x in obj["sigma_t"]),
        int(obj["d1"]),
        int(obj["d2"]),
        tuple(unnest(t) for t in obj["trees1"]),
        tuple(unnest(t) for t in obj["trees2"]),
    )


def _leaves(node):
    label, kids = node
    if not kids:
        yield label
    for c in kids:
        yield from _leaves(c)


def _shape_errors(node, delta: int, depth: int, where: str) -> list:
    label, kids = node
    if depth == 0:
        return [] if not kids else [(2, f"{where}: node below the required depth")]
    if len(kids) != delta:
        return [(2, f"{where}: {len(kids)} children, expected {delta}")]
    out = []
    for j, c in enumerate(kids):
        out.extend(_shape_errors(c, delta, depth - 1, f"{where}.{j}"))
    return out


def _constraint_errors(node, p: RootedProblem, where: str) -> list:
    label, kids = node
    out = []
    if len(kids) == p.delta:
        key = (label, tuple(sorted(c[0] for c in kids)))
        if key not in p.constraint_set:
            out.append((3, f"{where}: configuration not allowed"))
    for j, c in enumerate(kids):
        out.extend(_constraint_errors(c, p, f"{where}.{j}"))
    return out


def verify_certificate(p: RootedProblem, c: Certificate) -> Verdict:
    """Check the five certificate conditions; violations are ``(condition, detail)``.

    Conditions: 1 coprime depths, 2 complete trees of the stated depth,
    3 every internal node satisfies 𝒱, 4 one common leaf labeling per family
    using only Σ_T labels, 5 tree i is rooted at σ_i.
    """
    out = []
    if c.d1 < 1 or c.d2 < 1 or gcd(c.d1, c.d2) != 1:
        out.append((1, f"depths ({c.d1}, {c.d2}) are not coprime positive integers"))
    if not c.sigma_t or len(set(c.sigma_t)) != len(c.sigma_t):
        out.append((5, "sigma_t must be a non-empty list of distinct labels"))
    sigma = set(c.sigma_t)
    for fam, (trees, d) in enumerate(((c.trees1, c.d1), (c.trees2, c.d2)), start=1):
        if len(trees) != len(c.sigma_t):
            out.append((5, f"family {fam} has {len(trees)} trees for {len(c.sigma_t)} labels"))
        shapes_ok = True
        for i, t in enumerate(trees):
            errs = _shape_errors(t, p.delta, d, f"trees{fam}[{i}]")
            if errs:
                shapes_ok = False
                out.extend(errs)
        if not shapes_ok:
            continue
        for i, t in enumerate(trees):
            out.extend(_constraint_errors(t, p, f"trees{fam}[{i}]"))
            if i < len(c.sigma_t) and t[0] != c.sigma_t[i]:
                out.append((5, f"trees{fam}[{i}]: root label differs from sigma_t[{i}]"))
        patterns = [tuple(_leaves(t)) for t in trees]
        if patterns and any(pt != patterns[0] for pt in patterns):
            out.append((4, f"family {fam}: leaf labelings differ"))
        for pt in patterns[:1]:
            if not set(pt) <= sigma:
                out.append((4, f"family {fam}: leaf label outside sigma_t"))
    return Verdict(not out, tuple(out))


# --- search -----------------------------------------------------------------------

def _depth_pairs(min_depth: int, max_depth: int) -> list[tuple[int, int]]:
    pairs = [(a, b) for b in range(min_depth, max_depth + 1) for a in range(min_depth, b) if gcd(a, b) == 1]
    return sorted(pairs, key=lambda ab: (ab[1], ab[0]))


def _subtree_types(p: RootedProblem, sigma_t, max_depth: int, budget: list):
    """For each height h, the achievable feasible-root sets of height-h subtrees.

    A height-h subtree with leaves labeled from Σ_T has a *type*: the set of
    labels its root can take. Types of height h come from multisets of Δ
    child types of height h-1. Each type remembers one derivation so a leaf
    labeling can be rebuilt.
    """
    labels = sorted(p.label_ids)
    levels = [{frozenset((x,)): x for x in sigma_t}]
    for _ in range(max_depth):
        prev = sorted(levels[-1], key=sorted)
        cur: dict = {}
        for combo in itertools.combinations_with_replacement(prev, p.delta):
            budget[0] += 1
            if budget[0] > budget[1]:
                raise BudgetExceeded(f"more than {budget[1]} subtree expansions")
            f = frozenset(s for s in labels if any(_assign(cf, combo) is not None for cf in p.by_parent[s]))
            if f and f not in cur:
                cur[f] = combo
        levels.append(cur)
    return levels


def _leaf_labeling(levels, f, h: int) -> list[int]:
    if h == 0:
        return [levels[0][f]]
    out = []
    for child in levels[h][f]:
        out.extend(_leaf_labeling(levels, child, h - 1))
    return out


def _labeled_tree(p: RootedProblem, d: int, leaves: list[int], root_label: int):
    g = complete_tree(p.delta, d, DELTA_ARY)
    kids = g.children
    first_leaf = g.n - len(leaves)
    fixed = {first_leaf + j: x for j, x in enumerate(leaves)}
    fixed[0] = root_label
    sol = solve_rooted_forest(g.order, kids, lambda v: len(kids[v]) == p.delta, p, fixed)
    if sol is None:  # pragma: no cover - excluded by the type computation
        raise AssertionError("type computation and labeling disagree")

    def nest(v):
        return (sol[v], tuple(nest(c) for c in kids[v]))

    return nest(0)


def search_certificate(
    p: RootedProblem,
    max_depth: int = 6,
    max_sigma: int | None = None,
    min_depth: int = 2,
    expansion_cap: int = 10**7,
):
    """Bounded, deterministic search for a coprime certificate.

    Label sets Σ_T are tried by increasing size (then lexicographically) and,
    for each, depth pairs d1 < d2 by increasing d2 then d1. Returns a
    ``Certificate`` or ``CertificateNotFound``; raises ``BudgetExceeded`` once
    more than ``expansion_cap`` subtree combinations have been examined.
    """
    if max_depth < 2:
        raise ValueError("max_depth must be >= 2")
    if min_depth < 1:
        raise ValueError("min_depth must be >= 1")
    universe = sorted(p.label_ids)
    max_sigma = len(universe) if max_sigma is None else min(max_sigma, len(universe))
    pairs = _depth_pairs(min_depth, max_depth)
    budget = [0, expansion_cap]
    if not p.constraints:
        return CertificateNotFound(max_depth, max_sigma, min_depth, 0)
    for size in range(1, max_sigma + 1):
        for sigma_t in itertools.combinations(universe, size):
            levels = _subtree_types(p, sigma_t, max_depth, budget)
            target = frozenset(sigma_t)
            witness = {}
            for h in range(min_depth, max_depth + 1):
                hits = sorted((f for f in levels[h] if target <= f), key=sorted)
                if hits:
                    witness[h] = hits[0]
            for d1, d2 in pairs:
                if d1 in witness and d2 in witness:
                    fams = []
                    for d in (d1, d2):
                        leaves = _leaf_labeling(levels, witness[d], d)
                        fams.append(tuple(_labeled_tree(p, d, leaves, s) for s in sigma_t))
                    return Certificate(tuple(sigma_t), d1, d2, fams[0], fams[1])
    return CertificateNotFound(max_depth, max_sigma, min_depth, budget[0])
