# # Three small histories
#
# A walk through the smallest interesting cases: a history that is atomic,
# one that needs k=2 and one that needs k=3.

from katomic import History, brute_force_k_atomic, check_1atomic, check_2atomic_fzf, min_k, read, write
from katomic.zones import zones

# ## Building histories
#
# Each operation has an id, a value and a closed time interval.

ha = History((write("w", "a", 0, 2), read("r", "a", 4, 6)))
hb = History((write("w1", "a", 0, 2), write("w2", "b", 4, 6), read("r1", "a", 8, 10)))
hc = History((
    write("w1", "a", 0, 2),
    write("w2", "b", 4, 6),
    write("w3", "c", 8, 10),
    read("r1", "a", 12, 14),
))

for name, h in [("HA", ha), ("HB", hb), ("HC", hc)]:
    print(name, h.ops)

# ## Zones
#
# The read of `a` in HB starts after `w2` has finished, so the zone of `a`
# runs forward over the whole of `w2`'s backward zone.

for z in sorted(zones(hb), key=lambda z: z.low):
    print(z.value, z.kind.value, (z.low, z.high))

v = check_1atomic(hb)
print("HB 1-atomic?", v.label, v.certificate["condition"])

# ## Two stale writes are one too many for k=2

v = check_2atomic_fzf(hb)
print("HB 2-atomic?", v.label, v.witness.flatten())

v = check_2atomic_fzf(hc)
print("HC 2-atomic?", v.label, v.certificate)

# ## Smallest k

for name, h in [("HA", ha), ("HB", hb), ("HC", hc)]:
    print(name, "min k =", min_k(h))

# The brute-force oracle agrees and hands back the only valid order for HC.

print(brute_force_k_atomic(hc, 3).witness.flatten())
