import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import rooted_lb_count, unrooted_lb_count
from treelcl.instances import (
    Schedule,
    build_chunk_instance,
    build_lb_rooted,
    build_lb_unrooted,
    chunk_node_count,
    choice_count,
    enumerate_choices,
    lb_rooted_size,
    lb_unrooted_size,
    node_subsets,
    sample_schedule_rooted,
    sample_schedule_unrooted,
)
from treelcl.trees import layer_code


def test_frozen_sizes():
    assert build_lb_rooted(2, 1, 1, 1).n == 175
    assert build_lb_unrooted(3, 1, 1, 1).n == 214


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 2), st.integers(1, 2), st.integers(1, 2))
def test_rooted_size_recurrence(delta, beta, k, t):
    if delta == 3 and k == 2 and beta == 2:
        return  # millions of nodes; the closed form is still checked
    g = build_lb_rooted(delta, beta, k, t)
    assert g.n == lb_rooted_size(delta, beta, k, t) == rooted_lb_count(delta, beta, k, t)
    assert g.check_degrees(delta) == []
    assert (g.parent[1:] < np.arange(1, g.n)).all()


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(1, 2), st.integers(1, 2), st.integers(1, 2))
def test_unrooted_size_recurrence(delta, gamma, k, t):
    if delta == 4 and k == 2:
        return
    g = build_lb_unrooted(delta, gamma, k, t)
    assert g.n == lb_unrooted_size(delta, gamma, k, t) == unrooted_lb_count(delta, gamma, k, t)
    assert g.check_degrees(delta) == []


def test_rooted_layers_and_paths():
    g = build_lb_rooted(2, 1, 2, 1)
    paths = g.paths
    layers = g.meta["path_layer"]
    mains = g.meta["path_main"]
    assert sum(mains) == 2
    for pid, nodes in enumerate(paths):
        assert len(nodes) == 8
        assert (g.layer[nodes] == layer_code("C", layers[pid])).all()
        assert (g.parent[nodes[1:]] == nodes[:-1]).all()
    # the two main paths are stacked: v_1 of layer 2 hangs below v_s of layer 1
    main = [p for p, m in zip(paths, mains) if m]
    assert g.parent[main[1][0]] == main[0][-1]
    assert g.parent[0] == -1


def test_schedule_is_permutation_and_deterministic():
    g = build_lb_rooted(2, 1, 2, 1)
    a = sample_schedule_rooted(g, 1, 42)
    b = sample_schedule_rooted(g, 1, 42)
    assert np.array_equal(a.order, b.order) and a.u_nodes == b.u_nodes
    assert sorted(a.order.tolist()) == list(range(g.n))
    prefix = a.order[: a.prefix_length].tolist()
    assert set(prefix[: len(a.u_nodes[0])]) == set(a.u_nodes[0])
    assert all(d in (3, 4) for ds in a.d_samples for d in ds)


def test_distance_samples_are_balanced():
    g = build_lb_rooted(2, 1, 1, 1)
    draws = [d for s in range(200) for d in sample_schedule_rooted(g, 1, s).d_samples[0]]
    frac = np.mean(np.array(draws) == 3)
    assert 0.4 < frac < 0.6


def test_schedule_json_roundtrip():
    g = build_lb_unrooted(3, 1, 1, 1)
    s = sample_schedule_unrooted(g, 1, 5)
    back = Schedule.from_json(s.to_json())
    assert np.array_equal(back.order, s.order) and back.u_nodes == s.u_nodes and back.seed == 5


def test_unrooted_u_positions():
    g = build_lb_unrooted(3, 1, 1, 2)
    s = sample_schedule_unrooted(g, 2, 0)
    for pid, u, d in zip(s.path_ids[0], s.u_nodes[0], s.d_samples[0]):
        assert g.core_index[u] == d and d in (5, 6)
        assert g.core_path[u] == pid


def test_schedule_rejects_wrong_tree():
    g = build_lb_rooted(2, 1, 1, 1)
    with pytest.raises(ValueError):
        sample_schedule_rooted(g, 2, 0)
    with pytest.raises(ValueError):
        sample_schedule_unrooted(g, 1, 0)


def test_node_subsets_frozen_counts():
    g = build_lb_rooted(2, 1, 1, 1)
    ns = node_subsets(g, sample_schedule_rooted(g, 1, 0))
    counts = [int(m.sum()) for _, m in ns.chain()]
    assert counts[0] == int((g.child_counts == 2).sum())  # β = 1: every internal node
    assert counts == sorted(counts, reverse=True)
    assert counts[-1] > 0


def test_chunk_instance_b1_attaches_whole_chunk():
    inst = build_chunk_instance(1, 2, 2, (1, 3, 1), check_depth=False)
    g = inst.tree
    assert g.n == chunk_node_count(1, 2, 2)
    assert len(g.roots) == 8  # chunk 0 trees stay roots, chunk 1 trees hang below u
    u = inst.middle_nodes[3]
    hung = [r for r in range(g.n) if g.chunk[r] == 1 and g.parent[r] >= 0 and g.chunk[g.parent[r]] == 0]
    assert len(hung) == 8
    assert all(g.depth[h] == 2 * 2 + 1 for h in hung)
    assert all(_is_descendant(g, g.parent[h], u) for h in hung)


def _is_descendant(g, v, u):
    while v >= 0:
        if v == u:
            return True
        v = g.parent[v]
    return False


def test_chunk_instance_b0_merges_roots():
    inst = build_chunk_instance(1, 2, 2, (0, 3, 1), check_depth=False)
    g = inst.tree
    assert g.n == chunk_node_count(1, 2, 2) - 4
    merged = [m for m, _ in g.meta["merged"]]
    assert len(merged) == 4
    assert all(g.child_counts[m] == 2 for m in merged)
    assert len(g.roots) == 8 + 4  # chunk 0 untouched, half of chunk 1 merged away
    assert g.check_degrees(2) == []


def test_chunk_choice_validation():
    with pytest.raises(ValueError):
        build_chunk_instance(1, 2, 2, (0, 0, 0), check_depth=False)  # u inside chunk C
    with pytest.raises(ValueError):
        build_chunk_instance(1, 2, 2, (2, 0, 1), check_depth=False)
    with pytest.raises(ValueError):
        build_chunk_instance(3, 2, 2, (1, 0, 1))  # 2^2 is not above 2*3


def test_enumerate_choices_matches_count():
    for sigma, delta, d in [(1, 2, 2), (2, 2, 3), (1, 3, 1)]:
        ch = enumerate_choices(sigma, delta, d, check_depth=False)
        assert len(ch) == len(set(ch)) == choice_count(sigma, delta, d)


def test_invalid_lb_parameters():
    with pytest.raises(ValueError):
        build_lb_rooted(2, 0, 1, 1)
    with pytest.raises(ValueError):
        build_lb_unrooted(3, 1, 0, 1)
    with pytest.raises(ValueError):
        build_lb_unrooted(1, 1, 1, 1)
