# # Weighted staleness is hard
#
# Every bin-packing instance maps to a weighted history. Long writes are the
# items; the gaps between short writes are the bins; k is the capacity plus
# two. Packing exists exactly when the history is weighted k-atomic.

import itertools

from katomic.weighted import BinPackingInstance, binpacking_to_kwav, brute_force_binpacking, brute_force_weighted

inst = BinPackingInstance(sizes=(2, 3), bins=2, capacity=3)
wh, k = binpacking_to_kwav(inst)

for op in sorted(wh.base, key=lambda o: o.start):
    w = wh.weight.get(op.value, "") if op.is_write else ""
    print(f"{op.kind.value:5} {op.id:6} [{op.start:3}, {op.finish:3}] weight={w}")

print("k =", k)
print("packs:", brute_force_binpacking(inst), " weighted verdict:", brute_force_weighted(wh, k).label)

# ## One more item and it no longer fits

inst = BinPackingInstance(sizes=(2, 3, 2), bins=2, capacity=3)
wh, k = binpacking_to_kwav(inst)
print("packs:", brute_force_binpacking(inst), " weighted verdict:", brute_force_weighted(wh, k).label)

# ## Small exhaustive sweep

agree = total = 0
for n in range(4):
    for sizes in itertools.combinations_with_replacement(range(1, 4), n):
        for bins, cap in itertools.product(range(1, 3), range(1, 4)):
            inst = BinPackingInstance(sizes, bins, cap)
            wh, k = binpacking_to_kwav(inst)
            total += 1
            agree += brute_force_binpacking(inst) == bool(brute_force_weighted(wh, k))
print(f"{agree}/{total} instances agree")
