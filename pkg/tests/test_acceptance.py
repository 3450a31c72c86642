"""Acceptance suite: one test per criterion, summarized at the end of the run."""

import itertools
import time
from math import gcd

import networkx as nx
import numpy as np
import pytest

from oracles import naive_depth, oracle_skeleton, random_rooted, random_tree_parent, random_unrooted
from treelcl.catalog import (
    empty_problem,
    proper_coloring,
    single_label,
    sinkless_orientation,
    three_coloring_path,
    two_coloring_binary,
    two_coloring_path,
)
from treelcl.certificate import Certificate, CertificateNotFound, search_certificate, verify_certificate
from treelcl.depth import INF, classify, depth, pruning_constant, trim_rooted
from treelcl.harness import (
    FailureSetup,
    OfflineOracle,
    ParityVictim,
    UniformRandom,
    assert_view_isomorphism,
    estimate_failure,
    reveal_run,
)
from treelcl.instances import (
    build_chunk_instance,
    build_lb_rooted,
    build_lb_unrooted,
    chunk_node_count,
    enumerate_choices,
    node_subsets,
    sample_schedule_rooted,
    sample_schedule_unrooted,
)
from treelcl.solve import feasible_root_labels
from treelcl.trees import DELTA_ARY, Tree, complete_tree, path_ruling_set, skeleton_tree


def _line(n, ok, detail=""):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")


# 1 -------------------------------------------------------------------------------

@pytest.mark.criterion(1, "trim matches complete-tree labelability (500 problems, all subsets)")
def test_trim_oracle_equivalence():
    rng = np.random.default_rng(20240601)
    start = time.perf_counter()
    mismatches = []
    for _ in range(500):
        p = random_rooted(rng, max_labels=4, max_delta=3)
        beta = pruning_constant(p)
        tree = complete_tree(p.delta, beta + 1, DELTA_ARY)
        for r in range(p.n_labels + 1):
            for sub in itertools.combinations(range(p.n_labels), r):
                want = feasible_root_labels(tree, p, allowed=sub) if sub else frozenset()
                if trim_rooted(p, sub) != want:
                    mismatches.append((p, sub))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 60
    _line(1, ok, f"({len(mismatches)} mismatches, {elapsed:.1f}s)")
    assert not mismatches, mismatches[:3]
    assert elapsed < 60


# 2 -------------------------------------------------------------------------------

@pytest.mark.criterion(2, "depth equals the good-sequence enumerator (200 rooted + 100 unrooted)")
def test_depth_oracle_equivalence():
    rng = np.random.default_rng(7)
    mismatches = []
    problems = [random_rooted(rng, max_labels=3, max_delta=3) for _ in range(200)]
    problems += [random_unrooted(rng, max_labels=3, max_delta=3) for _ in range(100)]
    for p in problems:
        got, want = depth(p).value, naive_depth(p)
        if got != want:
            mismatches.append((p, got, want))
    _line(2, not mismatches, f"({len(mismatches)} mismatches)")
    assert not mismatches, mismatches[:3]


# 3 -------------------------------------------------------------------------------

@pytest.mark.criterion(3, "canonical classifications of the five fixtures")
def test_canonical_classifications():
    start = time.perf_counter()
    empty = classify(empty_problem())
    single = classify(single_label())
    two = classify(two_coloring_path())
    three = classify(three_coloring_path())
    sink = classify(sinkless_orientation(3))
    elapsed = time.perf_counter() - start
    checks = [
        empty.depth.value == 0 and empty.cls == "unsolvable",
        single.depth.value == INF and single.certificate is not None
        and (single.certificate.d1, single.certificate.d2) == (2, 3),
        two.depth.value == 1 and two.cls == "Theta(n^{1/1})",
        three.depth.value == INF and three.certificate is not None
        and (three.certificate.d1, three.certificate.d2) == (2, 3),
        sink.depth.value == INF and sink.cls == "O(log n)",
        elapsed < 10,
    ]
    _line(3, all(checks), f"({elapsed:.2f}s)")
    assert all(checks), checks


# 4 -------------------------------------------------------------------------------

@pytest.mark.criterion(4, "chunk node count and instance count formulas")
def test_chunk_formulas():
    bad = []
    for delta, d, sigma in itertools.product((2, 3), (2, 3, 4), (1, 2, 3)):
        n = (sigma + 1) * delta ** (d + 1) * (delta ** (2 * d + 1) - 1) // (delta - 1)
        inst = build_chunk_instance(sigma, delta, d, (1, 0, 1), check_depth=False)
        if inst.tree.n != n or chunk_node_count(sigma, delta, d) != n:
            bad.append(("nodes", delta, d, sigma, inst.tree.n, n))
        del inst
        count = len(enumerate_choices(sigma, delta, d, check_depth=False))
        if count != 2 * sigma * (sigma + 1) * delta ** (2 * d + 1) or not count < n:
            bad.append(("instances", delta, d, sigma, count))
    _line(4, not bad, f"({len(bad)} mismatches)")
    assert not bad, bad


# 5 -------------------------------------------------------------------------------

def _u_distances_ok(g: Tree, sched, t: int) -> bool:
    """Each u-node lies at least 2t+1 from both ends of its core path.

    Rooted paths are measured from v_1 and v_s; unrooted ones from the
    (R, i+1) node adjacent to v_1 and from v_s.
    """
    paths = g.paths
    for pids, us in zip(sched.path_ids, sched.u_nodes):
        for pid, u in zip(pids, us):
            nodes = paths[pid]
            idx = int(np.flatnonzero(nodes == u)[0])
            to_end = len(nodes) - 1 - idx
            to_start = idx if g.kind == "rooted" else idx + 1
            if min(to_start, to_end) < 2 * t + 1:
                return False
    return True


@pytest.mark.criterion(5, "lower-bound degree, path, distance and containment invariants")
def test_lower_bound_structure():
    bad = []
    for delta, k, t in itertools.product((2, 3), (1, 2), (1, 2)):
        s = 4 * t + 4
        for kind in ("rooted", "unrooted"):
            g = build_lb_rooted(delta, 1, k, t) if kind == "rooted" else build_lb_unrooted(delta, 1, k, t)
            sched = (sample_schedule_rooted if kind == "rooted" else sample_schedule_unrooted)(g, t, seed=delta * 100 + k * 10 + t)
            tag = (kind, delta, k, t)
            if g.check_degrees(delta):
                bad.append(("degree", tag))
            if any(len(p) != s for p in g.paths):
                bad.append(("path-length", tag))
            if not _u_distances_ok(g, sched, t):
                bad.append(("u-distance", tag))
            chain = [m for _, m in node_subsets(g, sched).chain()]
            if len(chain) != 2 * k + 1:
                bad.append(("chain-length", tag))
            if any((b & ~a).any() for a, b in zip(chain, chain[1:])):
                bad.append(("containment", tag))
            if not chain[-1].any():
                bad.append(("empty-last", tag))
    _line(5, not bad, f"({len(bad)} violations)")
    assert not bad, bad


# 6 -------------------------------------------------------------------------------

@pytest.mark.criterion(6, "u-node views identical within layers and disjoint (50 schedules)")
def test_independence_property():
    g = build_lb_rooted(2, 1, 2, 2)
    p = two_coloring_binary()
    failures = []
    for seed in range(50):
        sched = sample_schedule_rooted(g, 2, seed)
        trace = reveal_run(g, p, sched, UniformRandom(), locality=2, seed=seed)
        verdict = assert_view_isomorphism(trace, sched)
        if not verdict.ok:
            failures.append((seed, verdict.violations[:3]))
    _line(6, not failures, f"({len(failures)} failing schedules)")
    assert not failures, failures


# 7 -------------------------------------------------------------------------------

@pytest.mark.criterion(7, "parity victim fails often, offline oracle never (200 trials each)")
def test_failure_exhibition():
    start = time.perf_counter()
    p = two_coloring_binary()
    g = build_lb_rooted(2, pruning_constant(p), 1, 1)

    def sampler(seed):
        return sample_schedule_rooted(g, 1, seed)

    victim = estimate_failure(FailureSetup(g, p, ParityVictim(), 1, sampler), 200, master_seed=11)
    oracle = estimate_failure(FailureSetup(g, p, OfflineOracle(), "n", sampler), 200, master_seed=11)
    elapsed = time.perf_counter() - start
    ok = victim.p_hat >= 0.4 and oracle.failures == 0 and elapsed < 300
    _line(7, ok, f"(victim {victim.p_hat:.3f}, oracle {oracle.failures} failures, {elapsed:.1f}s)")
    assert victim.p_hat >= 0.4
    assert oracle.failures == 0
    assert elapsed < 300


# 8 -------------------------------------------------------------------------------

def _subdivided_tree(rng, n_max: int) -> Tree:
    """Random recursive tree with edges stretched into paths, capped at n_max nodes."""
    base = int(rng.integers(2, 60))
    parent = list(random_tree_parent(rng, base))
    budget = n_max - base
    for v in range(1, base):
        extra = int(min(budget, rng.integers(0, 25)))
        budget -= extra
        prev = parent[v]
        for _ in range(extra):
            parent.append(prev)
            prev = len(parent) - 1
        parent[v] = prev
    # relabel so that parents come first
    order, kids = [], [[] for _ in parent]
    for v, p in enumerate(parent):
        if p >= 0:
            kids[p].append(v)
    stack = [0]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(kids[v]))
    new = {v: i for i, v in enumerate(order)}
    par = np.array([new[parent[v]] if parent[v] >= 0 else -1 for v in order], dtype=np.int64)
    return Tree("unrooted", par)


@pytest.mark.criterion(8, "skeleton equals leaf peeling; ruling segments within [c, 2c]")
def test_skeleton_and_ruling_set():
    rng = np.random.default_rng(99)
    bad = []
    for i in range(100):
        if i % 2:
            n = int(rng.integers(1, 2001))
            t = Tree("unrooted", random_tree_parent(rng, n))
        else:
            t = _subdivided_tree(rng, 2000)
        tau = int(rng.integers(0, 6))
        skel, psi = skeleton_tree(t, tau)
        if set(psi.tolist()) != oracle_skeleton(t.adjacency, tau):
            bad.append(("skeleton", i))
            continue
        # the skeleton keeps exactly the induced edges among survivors
        kept = {(int(psi[a]), int(psi[b])) for a, b in skel.edges()}
        want = {(a, b) for a, b in t.edges() if a in set(psi.tolist()) and b in set(psi.tolist())}
        if {tuple(sorted(e)) for e in kept} != {tuple(sorted(e)) for e in want}:
            bad.append(("skeleton-edges", i))
        if skel.n == 0:
            continue
        for c in (3, 5):
            rs = path_ruling_set(skel, c)
            if any(not c <= len(seg) <= 2 * c for seg in rs.segments):
                bad.append(("segment", i, c))
            g = nx.Graph(skel.edges())
            g.add_nodes_from(range(skel.n))
            for path in rs.paths:
                rulers = [v for v in path if v in set(rs.ruling)]
                pos = {v: j for j, v in enumerate(path)}
                if any(pos[b] - pos[a] < c + 1 for a, b in zip(rulers, rulers[1:])):
                    bad.append(("spacing", i, c))
                if any(min(abs(pos[v] - pos[r]) for r in rulers) > c for v in path):
                    bad.append(("domination", i, c))
    _line(8, not bad, f"({len(bad)} violations)")
    assert not bad, bad[:5]


# 9 -------------------------------------------------------------------------------

@pytest.mark.criterion(9, "certificates verify, search is deterministic, 2-coloring has none")
def test_certificate_roundtrip_and_determinism():
    rng = np.random.default_rng(5)
    problems = [single_label(2), single_label(3), three_coloring_path(), proper_coloring(2, 3), proper_coloring(2, 4)]
    problems += [random_rooted(rng, max_labels=3, max_delta=2) for _ in range(40)]
    bad = []
    found = 0
    for p in problems:
        a = search_certificate(p, max_depth=5)
        b = search_certificate(p, max_depth=5)
        if a != b:
            bad.append(("nondeterministic", p))
        if isinstance(a, Certificate):
            found += 1
            v = verify_certificate(p, a)
            if not v.ok or gcd(a.d1, a.d2) != 1:
                bad.append(("verify", p, v.violations))
    for p in (two_coloring_path(), two_coloring_binary()):
        for md in range(2, 7):
            if not isinstance(search_certificate(p, max_depth=md), CertificateNotFound):
                bad.append(("two-coloring", p.delta, md))
    ok = not bad and found >= 5
    _line(9, ok, f"({found} certificates checked, {len(bad)} problems)")
    assert found >= 5
    assert not bad, bad[:3]
