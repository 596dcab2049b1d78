# # LBT and FZF side by side
#
# Both decide 2-atomicity. LBT backtracks, so its worst case grows with write
# concurrency. FZF does a bounded amount of work per chunk. Here we feed them
# the same generated traces and watch the step counters.

import time

from katomic import check_2atomic_fzf, check_2atomic_lbt, normalize
from katomic.generators import GenConfig, gen_witnessed
from katomic.lbt import max_concurrent_writes

# ## Wider intervals mean more concurrent writes

n = 20_000
print(f"{'stretch':>8} {'c':>3} {'lbt steps/n':>12} {'fzf steps/n':>12} {'lbt s':>7} {'fzf s':>7}")
for stretch in [(1, 1), (2, 2), (4, 2), (6, 4)]:
    h = normalize(gen_witnessed(GenConfig(seed=1, ops=n, staleness_k=2, interval_stretch=stretch)))
    c = max_concurrent_writes(h)
    t0 = time.perf_counter()
    lbt = check_2atomic_lbt(h)
    t1 = time.perf_counter()
    fzf = check_2atomic_fzf(h)
    t2 = time.perf_counter()
    assert bool(lbt) == bool(fzf)
    print(f"{str(stretch):>8} {c:>3} {lbt.stats['steps'] / n:>12.2f} {fzf.stats['steps'] / n:>12.2f}"
          f" {t1 - t0:>7.2f} {t2 - t1:>7.2f}")

# ## Doubling n
#
# FZF's counter should roughly double each time n doubles, plus a log factor.

prev = None
for e in range(10, 16):
    h = normalize(gen_witnessed(GenConfig(seed=e, ops=2**e, staleness_k=2)))
    steps = check_2atomic_fzf(h).stats["steps"]
    print(2**e, steps, "" if prev is None else f"x{steps / prev:.2f}")
    prev = steps

# ## What the chunks look like

h = normalize(gen_witnessed(GenConfig(seed=3, ops=24, staleness_k=2, interval_stretch=(3, 2))))
v = check_2atomic_fzf(h, explain=True)
for chunk in v.explain:
    print(chunk["interval"], "forward", chunk["forward"], "backward", chunk["backward"])
    for t in chunk["tried"]:
        print("   ", "viable" if t["viable"] else "rejected", t["order"])
