"""Build a rooted lower-bound instance and compare online algorithms on it.

The parity victim commits to one 2-coloring class per path and is caught by
the adversarial u-node distances; the offline oracle sees everything.
"""

from treelcl.catalog import two_coloring_binary
from treelcl.harness import (
    FailureSetup,
    OfflineOracle,
    ParityVictim,
    UniformRandom,
    assert_view_isomorphism,
    estimate_failure,
    reveal_run,
)
from treelcl.instances import build_lb_rooted, node_subsets, sample_schedule_rooted

t = 1
g = build_lb_rooted(2, 1, 1, t)
p = two_coloring_binary()
print("nodes:", g.n, "paths:", len(g.paths))

sched = sample_schedule_rooted(g, t, 0)
print("u-nodes per layer:", [len(u) for u in sched.u_nodes], "distances:", sched.d_samples)
print("subsets:", [(name, int(mask.sum())) for name, mask in node_subsets(g, sched).chain()])

trace = reveal_run(g, p, sched, UniformRandom(), t, 0)
print("u-node views independent:", assert_view_isomorphism(trace, sched).ok)


def sampler(seed):
    return sample_schedule_rooted(g, t, seed).order


for alg, T in ((ParityVictim(), t), (UniformRandom(), t), (OfflineOracle(), "n")):
    est = estimate_failure(FailureSetup(g, p, alg, T, sampler), 40, 7)
    lo, hi = est.ci95
    print(f"{alg!r:18s} T={T}: {est.failures}/{est.trials} failed, 95% CI [{lo:.2f}, {hi:.2f}]")
