"""Online-LOCAL simulation, failure estimation and view-independence checks.

A run reveals the nodes of a tree one at a time in a fixed order. After
step i the algorithm sees the subgraph induced by the union of the radius-T
balls around the nodes revealed so far, the outputs given at earlier steps,
and the true degree of every visible node. It keeps its own memory across
steps and draws randomness from a stream the schedule never sees.

Nodes are shown under random handles, so node ids (which encode the
construction) never reach the algorithm. Unrooted nodes additionally get a
random port order; an unrooted output lists one label per port.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import binomtest

from .automaton import analyze_components, build_automaton_rooted, build_automaton_unrooted
from .problem import Problem, RootedProblem
from .rng import derive_rng, derive_seed
from .solve import Verdict, check_rooted, check_unrooted, solve_rooted_forest, solve_unrooted_component
from .trees import Tree

__all__ = [
    "View",
    "Algorithm",
    "OfflineOracle",
    "UniformRandom",
    "FixedCommitment",
    "ParityVictim",
    "ALGORITHMS",
    "make_algorithm",
    "resolve_locality",
    "RunTrace",
    "reveal_run",
    "FailureSetup",
    "FailureEstimate",
    "estimate_failure",
    "assert_view_isomorphism",
    "InvalidOutput",
]

_UNSEEN = 1 << 62


class InvalidOutput(ValueError):
    """The algorithm returned something that is not a valid output for the revealed node."""


def resolve_locality(locality, n: int) -> int:
    """Evaluate a locality given as an int, the token ``"n"`` or a function of n."""
    if isinstance(locality, str):
        if locality.strip() == "n":
            return n
        locality = int(locality)
    elif callable(locality):
        locality = int(locality(n))
    if int(locality) < 0:
        raise ValueError("locality must be >= 0")
    return int(locality)


# --- run state and the algorithm's window onto it ------------------------------------

class _RunState:
    def __init__(self, g: Tree, p: Problem, locality: int, seed: int):
        self.g = g
        self.p = p
        self.rooted = g.kind == "rooted"
        self.locality = locality
        self.adj = g.adjacency
        self.parent = g.parent.tolist()
        self.kids = g.children
        n = g.n
        self.vis_step = [_UNSEEN] * n
        self.reveal_step = [_UNSEEN] * n
        self.radius = [-1] * n
        self.visible: list[int] = []
        self.edges_seen = 0
        self.step = -1
        self.current = -1
        self.outputs: list = [None] * n
        perm = derive_rng(seed, "handles").permutation(n)
        self.handle = perm.tolist()
        self.node_of = {h: v for v, h in enumerate(self.handle)}
        if not self.rooted:
            prng = derive_rng(seed, "ports")
            self.ports = [[self.adj[v][j] for j in prng.permutation(len(self.adj[v]))] for v in range(n)]

    def expand(self, v: int):
        """Make the radius-T ball around ``v`` visible."""
        if self.radius[v] >= self.locality:
            return
        queue = deque([(v, self.locality)])
        self.radius[v] = self.locality
        while queue:
            x, r = queue.popleft()
            if self.vis_step[x] == _UNSEEN:
                self.vis_step[x] = self.step
                self.visible.append(x)
                self.edges_seen += sum(1 for w in self.adj[x] if self.vis_step[w] != _UNSEEN and w != x)
            if r > 0:
                for w in self.adj[x]:
                    if self.radius[w] < r - 1:
                        self.radius[w] = r - 1
                        queue.append((w, r - 1))


class View:
    """What the algorithm may see at the current step.

    A thin read-only window onto the run: every query checks that the node
    is visible at this step, so nothing outside the union of balls can be
    reached. Nodes are identified by opaque handles.
    """

    __slots__ = ("_s",)

    def __init__(self, state: _RunState):
        self._s = state

    def _node(self, h) -> int:
        v = self._s.node_of.get(h)
        if v is None or self._s.vis_step[v] > self._s.step:
            raise KeyError(f"node {h!r} is not in the view")
        return v

    def _handles(self, vs) -> list:
        s = self._s
        return sorted(s.handle[w] for w in vs if s.vis_step[w] <= s.step)

    @property
    def n(self) -> int:
        return self._s.g.n

    @property
    def locality(self) -> int:
        return self._s.locality

    @property
    def step(self) -> int:
        return self._s.step

    @property
    def problem(self) -> Problem:
        return self._s.p

    @property
    def current(self):
        return self._s.handle[self._s.current]

    def nodes(self) -> list:
        return sorted(self._s.handle[v] for v in self._s.visible)

    def __contains__(self, h) -> bool:
        v = self._s.node_of.get(h)
        return v is not None and self._s.vis_step[v] <= self._s.step

    def neighbors(self, h) -> list:
        return self._handles(self._s.adj[self._node(h)])

    def degree(self, h) -> int:
        return len(self._s.adj[self._node(h)])

    def parent(self, h):
        """Visible parent, or None (rooted trees)."""
        s = self._s
        p = s.parent[self._node(h)]
        return s.handle[p] if p >= 0 and s.vis_step[p] <= s.step else None

    def has_parent(self, h) -> bool:
        return self._s.parent[self._node(h)] >= 0

    def children(self, h) -> list:
        return self._handles(self._s.kids[self._node(h)])

    def num_children(self, h) -> int:
        return len(self._s.kids[self._node(h)])

    def ports(self, h) -> list:
        """Neighbour handles in port order; None for neighbours outside the view (unrooted)."""
        s = self._s
        if s.rooted:
            raise TypeError("ports are defined for unrooted trees")
        return [s.handle[w] if s.vis_step[w] <= s.step else None for w in s.ports[self._node(h)]]

    def revealed_at(self, h):
        r = self._s.reveal_step[self._node(h)]
        return None if r == _UNSEEN else r

    def output(self, h):
        """Output given at an earlier step: a label id (rooted) or a tuple in port order."""
        s = self._s
        v = self._node(h)
        return s.outputs[v] if s.reveal_step[v] < s.step else None


# --- algorithms ------------------------------------------------------------------

class Algorithm:
    """Base class: ``on_reveal(view, memory, rng)`` returns the output of ``view.current``."""

    name = "algorithm"

    def init_memory(self, problem: Problem, n: int, locality: int) -> dict:
        return {}

    def on_reveal(self, view: View, memory: dict, rng: np.random.Generator):
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


def _component(view: View, h) -> list:
    seen = {h}
    queue = deque([h])
    while queue:
        x = queue.popleft()
        for w in view.neighbors(x):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return list(seen)


def _rooted_order(view: View, comp) -> tuple[list, dict]:
    kids = {x: view.children(x) for x in comp}
    roots = sorted(x for x in comp if view.parent(x) is None)
    order = []
    queue = deque(roots)
    while queue:
        x = queue.popleft()
        order.append(x)
        queue.extend(kids[x])
    return order, kids


class OfflineOracle(Algorithm):
    """Sanity ceiling: needs locality n, solves the whole component exactly on first sight."""

    name = "offline-oracle"

    def init_memory(self, problem, n, locality):
        if locality < n:
            raise ValueError("offline-oracle needs locality n")
        return {"solution": {}}

    def on_reveal(self, view, memory, rng):
        sol = memory["solution"]
        cur = view.current
        p = view.problem
        if cur not in sol:
            comp = _component(view, cur)
            if isinstance(p, RootedProblem):
                order, kids = _rooted_order(view, comp)
                got = solve_rooted_forest(order, kids, lambda x: view.num_children(x) == p.delta, p)
            else:
                adj = {x: view.neighbors(x) for x in comp}
                got = solve_unrooted_component(cur, adj, lambda x: view.degree(x) == p.delta, p)
            if got is None:
                raise InvalidOutput("instance is unsolvable")
            if isinstance(p, RootedProblem):
                sol.update(got)
            else:
                for x in comp:
                    sol[x] = tuple(got[(x, w)] for w in view.ports(x))
        return sol[cur]


class UniformRandom(Algorithm):
    """Baseline: every output label uniformly at random."""

    name = "uniform-random"

    def on_reveal(self, view, memory, rng):
        k = view.problem.n_labels
        if isinstance(view.problem, RootedProblem):
            return int(rng.integers(k))
        return tuple(int(x) for x in rng.integers(k, size=view.degree(view.current)))


class FixedCommitment(Algorithm):
    """Victim that commits to fixed labels on nodes whose view holds no earlier output.

    The j-th such isolated node gets ``commit[j % len(commit)]``; every other
    node is labeled consistently with the outputs already in its view
    (falling back to ``commit[0]`` when none exists). Choosing ``commit``
    outside the trimmed label set, across two strongly connected components
    of the automaton, or inside one inflexible component makes the
    algorithm fail on lower-bound instances in the three ways the lower
    bound argument distinguishes.

    Every step re-solves the visible component, so a run costs O(n^2);
    keep instances to a few thousand nodes.
    """

    name = "fixed-commitment"

    def __init__(self, commit: Sequence = ()):
        self.commit = tuple(commit)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({list(self.commit)!r})"

    def _resolve(self, problem: Problem) -> tuple[int, ...]:
        if not self.commit:
            return (0,)
        return tuple(x if isinstance(x, (int, np.integer)) else problem.label_id(x) for x in self.commit)

    def init_memory(self, problem, n, locality):
        return {"commit": self._resolve(problem), "isolated": 0}

    def on_reveal(self, view, memory, rng):
        p = view.problem
        cur = view.current
        commit = memory["commit"]
        comp = _component(view, cur)
        labeled = {x: view.output(x) for x in comp if view.output(x) is not None}
        if not labeled:
            lab = commit[memory["isolated"] % len(commit)]
            memory["isolated"] += 1
            if isinstance(p, RootedProblem):
                return lab
            return self._isolated_unrooted(p, view.degree(cur), lab)
        if isinstance(p, RootedProblem):
            order, kids = _rooted_order(view, comp)

            def constrained(x):
                return view.num_children(x) == p.delta and len(kids[x]) == p.delta

            got = solve_rooted_forest(order, kids, constrained, p, labeled)
            return commit[0] if got is None else got[cur]
        adj = {x: view.neighbors(x) for x in comp}
        fixed = {}
        for x, out in labeled.items():
            for w, lab in zip(view.ports(x), out):
                if w is not None:
                    fixed[(x, w)] = lab

        def constrained(x):
            return view.degree(x) == p.delta and len(adj[x]) == p.delta

        got = solve_unrooted_component(cur, adj, constrained, p, fixed)
        ports = view.ports(cur)
        if got is None:
            return self._isolated_unrooted(p, len(ports), commit[0])
        return tuple(got[(cur, w)] if w is not None else commit[0] for w in ports)

    @staticmethod
    def _isolated_unrooted(p, degree: int, lab: int) -> tuple:
        for cf in p.node_configs:
            if lab in cf and len(cf) == degree:
                rest = list(cf)
                rest.remove(lab)
                return (lab, *rest)
        return (lab,) * degree


class ParityVictim(FixedCommitment):
    """Commits to the labels of the first inflexible strongly connected component.

    Views of the first revealed nodes are disjoint, so consecutive isolated
    nodes alternate through that component; a labeling then needs the right
    distance parity between them, which the schedule randomizes.
    """

    name = "parity-victim"

    def __init__(self):
        super().__init__(())

    def __repr__(self) -> str:
        return "ParityVictim()"

    def _resolve(self, problem):
        a = build_automaton_rooted(problem) if isinstance(problem, RootedProblem) else build_automaton_unrooted(problem)
        for comp in analyze_components(a):
            if not comp.flexible and comp.period is not None:
                states = sorted(comp.states)
                if isinstance(problem, RootedProblem):
                    return tuple(states)
                return tuple(sorted({x for s in states for x in s}))
        raise ValueError("problem has no inflexible strongly connected component")


ALGORITHMS: dict[str, Callable[..., Algorithm]] = {
    "offline-oracle": OfflineOracle,
    "uniform-random": UniformRandom,
    "parity-victim": ParityVictim,
    "fixed-commitment": FixedCommitment,
}


def make_algorithm(name: str, **kwargs) -> Algorithm:
    try:
        factory = ALGORITHMS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}") from None
    return factory(**kwargs)


# --- runs ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RunTrace:
    """One execution: schedule, per-step view fingerprints, outputs and verdict.

    ``fingerprints[i]`` is ``(visible nodes, visible edges)`` after step i.
    ``vis_step[v]`` is the step at which v became visible (``-1`` never).
    """

    order: np.ndarray
    locality: int
    fingerprints: tuple
    labeling: object
    verdict: Verdict
    vis_step: np.ndarray
    seed: int
    tree: Tree = field(repr=False, default=None)

    def __len__(self) -> int:
        return len(self.order)

    @property
    def reveal_step(self) -> np.ndarray:
        out = np.empty(len(self.order), dtype=np.int64)
        out[self.order] = np.arange(len(self.order))
        return out

    def to_dict(self, max_nodes: int = 100_000) -> dict:
        if len(self.order) > max_nodes:
            raise ValueError(f"trace has {len(self.order)} steps, above the export limit {max_nodes}")
        if isinstance(self.labeling, dict):
            lab = [[v, u, x] for (v, u), x in sorted(self.labeling.items())]
        else:
            lab = list(self.labeling)
        return {
            "order": self.order.tolist(),
            "locality": self.locality,
            "seed": str(self.seed),
            "fingerprints": [list(f) for f in self.fingerprints],
            "labeling": lab,
            **self.verdict.to_dict(),
        }


def _check_label(p: Problem, x) -> int:
    if isinstance(x, str):
        try:
            return p.label_id(x)
        except (KeyError, ValueError):
            raise InvalidOutput(f"unknown label {x!r}") from None
    if isinstance(x, (bool, np.bool_)) or not isinstance(x, (int, np.integer)) or not 0 <= x < p.n_labels:
        raise InvalidOutput(f"invalid label {x!r}")
    return int(x)


def reveal_run(g: Tree, problem: Problem, order, alg: Algorithm, locality=1, seed: int = 0) -> RunTrace:
    """Run ``alg`` against the reveal ``order`` and verify the final labeling."""
    if (g.kind == "rooted") != isinstance(problem, RootedProblem):
        raise ValueError("tree kind and problem kind differ")
    order = np.asarray(getattr(order, "order", order), dtype=np.int64)
    if len(order) != g.n or not np.array_equal(np.sort(order), np.arange(g.n)):
        raise ValueError("schedule is not a permutation of the nodes")
    order.setflags(write=False)
    T = resolve_locality(locality, g.n)
    state = _RunState(g, problem, T, seed)
    view = View(state)
    memory = alg.init_memory(problem, g.n, T)
    rng = derive_rng(seed, "algorithm")
    prints = []
    for i, v in enumerate(order.tolist()):
        state.step = i
        state.current = v
        state.reveal_step[v] = i
        state.expand(v)
        out = alg.on_reveal(view, memory, rng)
        if state.rooted:
            state.outputs[v] = _check_label(problem, out)
        else:
            if isinstance(out, (str, bytes)) or not hasattr(out, "__len__") or len(out) != len(state.adj[v]):
                raise InvalidOutput(f"step {i}: expected {len(state.adj[v])} half-edge labels, got {out!r}")
            state.outputs[v] = tuple(_check_label(problem, x) for x in out)
        prints.append((len(state.visible), state.edges_seen))
    if state.rooted:
        labeling = list(state.outputs)
        verdict = check_rooted(g, labeling, problem)
    else:
        labeling = {(v, w): x for v in range(g.n) for w, x in zip(state.ports[v], state.outputs[v])}
        verdict = check_unrooted(g, labeling, problem)
    vis = np.array([s if s != _UNSEEN else -1 for s in state.vis_step], dtype=np.int64)
    return RunTrace(order, T, tuple(prints), labeling, verdict, vis, seed, g)


# --- failure estimation -------------------------------------------------------------

@dataclass(frozen=True)
class FailureSetup:
    """Instance, problem, algorithm and locality; ``sampler(seed)`` draws a reveal order."""

    tree: Tree
    problem: Problem
    algorithm: Algorithm
    locality: object
    sampler: Callable


@dataclass(frozen=True)
class FailureEstimate:
    trials: int
    failures: int
    p_hat: float
    ci95: tuple[float, float]
    seed: int = 0

    def to_dict(self) -> dict:
        return {"trials": self.trials, "failures": self.failures, "p_hat": self.p_hat, "ci95": list(self.ci95)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def estimate_failure(setup: FailureSetup, trials: int, master_seed: int = 0) -> FailureEstimate:
    """Failure frequency over independent trials with a Clopper-Pearson 95% interval.

    Trial i draws its schedule from ``derive_seed(master, "schedule", i)``
    and its algorithm randomness from ``derive_seed(master, "run", i)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    failures = 0
    for i in range(trials):
        order = setup.sampler(derive_seed(master_seed, "schedule", i))
        trace = reveal_run(setup.tree, setup.problem, order, setup.algorithm, setup.locality,
                           derive_seed(master_seed, "run", i))
        failures += not trace.verdict.ok
    ci = binomtest(failures, trials).proportion_ci(confidence_level=0.95, method="exact")
    return FailureEstimate(trials, failures, failures / trials, (float(ci.low), float(ci.high)), master_seed)


# --- independence of u-node views ------------------------------------------------------

def _canonical(g: Tree, center: int, ball: dict, labeled, rooted: bool):
    """Child-order-invariant form of the ball rooted at ``center``."""
    adj = g.adjacency
    par = g.parent
    kids = g.children

    def form(v, came_from, tag):
        parts = []
        for w in adj[v]:
            if w != came_from and w in ball:
                wtag = ("up" if par[v] == w else "down") if rooted else "edge"
                parts.append(form(w, v, wtag))
        if rooted:
            node = (tag, len(kids[v]), bool(par[v] >= 0), bool(labeled[v]))
        else:
            node = (tag, len(adj[v]), bool(labeled[v]))
        return node + (tuple(sorted(parts)),)

    return form(center, None, "root")


def assert_view_isomorphism(trace: RunTrace, u_nodes, radius: int | None = None) -> Verdict:
    """Check that u-node views are identical within each layer and pairwise disjoint.

    ``u_nodes`` lists the special nodes per layer (a ``Schedule`` is accepted).
    Each view is the radius-``radius`` ball (default: the run's locality)
    around u at its reveal step, with the outputs present at that moment.
    """
    layers = getattr(u_nodes, "u_nodes", u_nodes)
    g = trace.tree
    r = trace.locality if radius is None else radius
    rooted = g.kind == "rooted"
    reveal = trace.reveal_step
    owner: dict = {}
    out = []
    for li, layer in enumerate(layers, start=1):
        forms = []
        for u in layer:
            ball = g.ball(int(u), r)
            step = reveal[u]
            labeled = {v: reveal[v] < step for v in ball}
            if any(labeled.values()):
                out.append(("labeled", li, int(u)))
            for v in ball:
                if v in owner and owner[v] != u:
                    out.append(("overlap", li, int(owner[v]), int(u)))
                    break
            for v in ball:
                owner.setdefault(v, u)
            forms.append(_canonical(g, int(u), ball, labeled, rooted))
        for j in range(1, len(forms)):
            if forms[j] != forms[0]:
                out.append(("non-isomorphic", li, int(layer[0]), int(layer[j])))
    return Verdict(not out, tuple(out))
