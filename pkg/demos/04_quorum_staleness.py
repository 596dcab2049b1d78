# # How stale do sloppy quorums get?
#
# Simulate a replicated register under different quorum sizes and measure
# the smallest k each per-key history satisfies.

from collections import Counter

from katomic import min_k, normalize, partition_by_key
from katomic.generators import QuorumConfig, simulate_quorum

settings = [(3, 2, 2), (3, 1, 2), (3, 1, 1), (5, 1, 1)]

for n, w, r in settings:
    dist = Counter()
    for seed in range(200):
        t = simulate_quorum(QuorumConfig(seed=seed, replicas=n, write_quorum=w, read_quorum=r,
                                         clients=4, ops=11, latency=(1, 20)))
        for h in partition_by_key(t).values():
            dist[str(min_k(normalize(h)))] += 1
    print(f"N={n} W={w} R={r}", dict(sorted(dist.items())))

# Overlapping quorums (W + R > N) stay at k=1. With single-replica reads and
# writes a read can miss the newest write, and k creeps up.

# ## A larger run, checked with the fast verifiers only

t = simulate_quorum(QuorumConfig(seed=0, replicas=5, write_quorum=1, read_quorum=1, clients=8, ops=5000, keys=4))
for key, h in sorted(partition_by_key(t).items()):
    print(key, len(h), "ops, min k", min_k(normalize(h)))
