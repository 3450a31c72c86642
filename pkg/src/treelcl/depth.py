"""Trimming, stabilization constants, depth of a problem and its locality class."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

from .automaton import flex_scc_rooted, flex_scc_unrooted
from .problem import (
    Problem,
    RootedProblem,
    UnrootedProblem,
    restrict_unrooted,
)

__all__ = [
    "INF",
    "trim_rooted",
    "trim_rooted_chain",
    "trim_unrooted",
    "extendible_chain",
    "pruning_constant",
    "DepthResult",
    "depth",
    "ClassReport",
    "InconsistentClassification",
    "classify",
]

INF = math.inf


# --- trim ----------------------------------------------------------------------

def trim_rooted_chain(p: RootedProblem, sigma_sub: Iterable[int]) -> list[frozenset[int]]:
    """R_0 ⊇ R_1 ⊇ ... up to and including the first repeated set.

    R_j is the set of labels that can root a complete Δ-ary tree of depth j
    with all labels in ``sigma_sub``.
    """
    cur = frozenset(sigma_sub)
    configs = {s: [frozenset(c) for c in p.by_parent[s]] for s in cur}
    chain = [cur]
    while True:
        nxt = frozenset(s for s in cur if any(c <= cur for c in configs[s]))
        if nxt == cur:
            return chain
        chain.append(nxt)
        cur = nxt


def trim_rooted(p: RootedProblem, sigma_sub: Iterable[int]) -> frozenset[int]:
    """Labels that root valid labelings of complete Δ-ary trees of every depth."""
    return trim_rooted_chain(p, sigma_sub)[-1]


def extendible_chain(p: UnrootedProblem, d_sub: Iterable) -> list[frozenset[int]]:
    """A_0 ⊇ A_1 ⊇ ... for half-edge labels pointing down into a subtree.

    A_h holds the labels x such that a half-edge labeled x, whose far
    endpoint roots a subtree of height h, can be completed: every internal
    node uses a configuration of ``d_sub`` and every edge a pair of ℰ. The
    far endpoint of a height-0 subtree is a leaf and only needs an ℰ
    partner.
    """
    configs = list(d_sub)
    partners = p.partners
    cur = frozenset(x for x in range(p.n_labels) if partners[x])
    chain = [cur]
    # for each config and each position y, the rest of the multiset
    rests = []
    for c in configs:
        for i, y in enumerate(c):
            if i and c[i - 1] == y:
                continue
            rests.append((y, frozenset(c[:i] + c[i + 1:])))
    while True:
        good_y = {y for y, rest in rests if rest <= cur}
        nxt = frozenset(x for x in cur if partners[x] & good_y)
        if nxt == cur:
            return chain
        chain.append(nxt)
        cur = nxt


def trim_unrooted(p: UnrootedProblem, d_sub: Iterable) -> frozenset:
    """Configurations that root valid labelings of T*_i for every i."""
    d_sub = frozenset(tuple(c) for c in d_sub)
    a = extendible_chain(p, d_sub)[-1]
    return frozenset(c for c in d_sub if set(c) <= a)


def _rooted_stabilization(p: RootedProblem, subset) -> int:
    return len(trim_rooted_chain(p, subset)) - 1


def _unrooted_stabilization(p: UnrootedProblem, subset) -> int:
    """Smallest i >= 1 such that every pruned configuration fails on T*_i."""
    subset = list(subset)
    chain = extendible_chain(p, subset)
    final = chain[-1]
    removed = [c for c in subset if not set(c) <= final]
    worst = 1
    for c in removed:
        # c roots T*_i iff all its labels lie in A_{i-1}
        i = 1
        while set(c) <= chain[i - 1]:
            i += 1
        worst = max(worst, i)
    return worst


def pruning_constant(p: Problem, cap: int = 1 << 16) -> int:
    """β (rooted) or γ (unrooted): trees of this depth already witness every pruning.

    Exact over all subsets of Σ (rooted) or 𝒱 (unrooted) when there are at
    most ``cap`` of them; otherwise the safe bound |Σ| (rooted) or |Σ|+1
    (unrooted).
    """
    if isinstance(p, RootedProblem):
        universe = sorted(p.label_ids)
        if 2 ** len(universe) > cap:
            return max(1, len(universe))
        best = 0
        for r in range(len(universe) + 1):
            for sub in itertools.combinations(universe, r):
                best = max(best, _rooted_stabilization(p, sub))
        return max(1, best)
    universe = list(p.node_configs)
    if 2 ** len(universe) > cap:
        return p.n_labels + 1
    best = 1
    for r in range(len(universe) + 1):
        for sub in itertools.combinations(universe, r):
            best = max(best, _unrooted_stabilization(p, sub))
    return best


# --- depth ---------------------------------------------------------------------

@dataclass(frozen=True)
class DepthResult:
    """``value`` is 0, a positive integer, or ``INF``.

    ``witness`` alternates trimmed sets and flexible components and ends with
    a trimmed set (except for INF, where it ends at the repeated component).
    ``state_trace`` is the nested chain of component sets (rooted) or
    restricted configuration sets (unrooted) followed by the search.
    """

    value: float
    witness: tuple = ()
    state_trace: tuple = ()

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    @property
    def is_infinite(self) -> bool:
        return self.value == INF

    @property
    def k(self) -> int | None:
        return None if self.is_infinite else int(self.value)

    @property
    def label(self) -> str:
        return "inf" if self.is_infinite else str(int(self.value))


def _better(a, b):
    return a if a[0] >= b[0] else b


def _depth_rooted(p: RootedProblem) -> DepthResult:
    memo: dict = {}

    def explore(prev: frozenset):
        # returns (length, witness, trace) for chains continuing after ``prev``
        if prev in memo:
            return memo[prev]
        r = trim_rooted(p, prev)
        if not r:
            res = (0, (), ())
        else:
            res = (1, (r,), ())
            for comp in flex_scc_rooted(p, r):
                if comp == prev:
                    res = (INF, (r, comp), (comp,))
                    break
                assert comp < prev
                sub = explore(comp)
                cand = (1 + sub[0], (r, comp) + sub[1], (comp,) + sub[2])
                res = _better(res, cand)
                if res[0] == INF:
                    break
        memo[prev] = res
        return res

    full = p.label_ids
    length, witness, trace = explore(full)
    return DepthResult(length, witness, (full,) + trace)


def _depth_unrooted(p: UnrootedProblem) -> DepthResult:
    memo: dict = {}

    def explore(w: frozenset):
        if w in memo:
            return memo[w]
        v = trim_unrooted(p, w)
        if not v:
            res = (0, (), ())
        else:
            res = (1, (v,), ())
            for d in flex_scc_unrooted(p, v):
                w2 = frozenset(restrict_unrooted(_with_configs(p, v), d).node_configs)
                if w2 == w:
                    res = (INF, (v, d), (w2,))
                    break
                assert w2 < w
                sub = explore(w2)
                res = _better(res, (1 + sub[0], (v, d) + sub[1], (w2,) + sub[2]))
                if res[0] == INF:
                    break
        memo[w] = res
        return res

    start = frozenset(p.node_configs)
    length, witness, trace = explore(start)
    return DepthResult(length, witness, (start,) + trace)


def _with_configs(p: UnrootedProblem, configs) -> UnrootedProblem:
    return UnrootedProblem(p.delta, p.labels, tuple(configs), p.edge_configs)


def depth(p: Problem) -> DepthResult:
    """Length of the longest good sequence (0, finite, or INF)."""
    if isinstance(p, RootedProblem):
        return _depth_rooted(p)
    return _depth_unrooted(p)


# --- classification --------------------------------------------------------------

class InconsistentClassification(RuntimeError):
    """A finite depth and a valid certificate were both found."""


@dataclass(frozen=True)
class ClassReport:
    depth: DepthResult
    cls: str
    description: str
    certificate: object = None
    caveats: tuple[str, ...] = field(default=())
    labels: tuple[str, ...] = ()
    kind: str = "rooted"

    def witness_names(self) -> list:
        out = []
        for i, s in enumerate(self.depth.witness):
            if self.kind == "rooted":
                out.append(sorted(self.labels[x] for x in s))
            else:
                out.append(sorted([self.labels[x] for x in c] for c in s))
        return out

    def to_dict(self) -> dict:
        return {
            "depth": self.depth.label,
            "class": self.cls,
            "description": self.description,
            "witness_good_sequence": self.witness_names(),
            "certificate": None if self.certificate is None else self.certificate.to_dict(self.labels),
            "caveats": list(self.caveats),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False)


def classify(
    p: Problem,
    max_depth: int = 6,
    max_sigma: int | None = None,
    expansion_cap: int = 10**7,
    cross_check: bool = True,
) -> ClassReport:
    """Locality class of ``p``.

    Rooted problems with infinite depth are split by a bounded search for a
    coprime certificate. With ``cross_check`` the search also runs for finite
    depths, where finding a certificate would be a contradiction.
    """
    from .certificate import BudgetExceeded, Certificate, search_certificate

    d = depth(p)
    caveats: list[str] = []
    if d.is_zero:
        return ClassReport(d, "unsolvable", "no valid labeling exists on large complete trees",
                           labels=p.labels, kind=p.kind)
    if isinstance(p, UnrootedProblem):
        if d.is_infinite:
            return ClassReport(d, "O(log n)", "O(log n) locality (solvable in CONGEST), hence also in online-LOCAL",
                               labels=p.labels, kind=p.kind)
        return ClassReport(d, f"Theta(n^{{1/{d.k}}})",
                           f"Theta(n^(1/{d.k})) in deterministic LOCAL and randomized online-LOCAL",
                           labels=p.labels, kind=p.kind)

    cert = None
    if d.is_infinite or cross_check:
        try:
            found = search_certificate(p, max_depth=max_depth, max_sigma=max_sigma, expansion_cap=expansion_cap)
        except BudgetExceeded as exc:
            found = None
            caveats.append(f"certificate search stopped: {exc}")
        if isinstance(found, Certificate):
            cert = found
    if not d.is_infinite:
        if cert is not None:
            raise InconsistentClassification(f"depth {d.k} but certificate found at {cert.d1, cert.d2}")
        return ClassReport(d, f"Theta(n^{{1/{d.k}}})",
                           f"Theta(n^(1/{d.k})) in both deterministic LOCAL and randomized online-LOCAL",
                           labels=p.labels, kind=p.kind, caveats=tuple(caveats))
    if cert is not None:
        return ClassReport(d, "O(log* n)",
                           "O(log* n) in deterministic LOCAL and O(1) in randomized online-LOCAL "
                           "(O(1) versus Theta(log* n) is not separated)",
                           certificate=cert, labels=p.labels, kind=p.kind, caveats=tuple(caveats))
    bound = max_sigma if max_sigma is not None else p.n_labels
    caveats.append(f"conditional: no coprime certificate with depth <= {max_depth} and |Sigma_T| <= {bound}; "
                   "a certificate beyond these bounds would move the problem to O(log* n)")
    return ClassReport(d, "Theta(log n)", "Theta(log n) in deterministic LOCAL and randomized online-LOCAL",
                       labels=p.labels, kind=p.kind, caveats=tuple(caveats))
