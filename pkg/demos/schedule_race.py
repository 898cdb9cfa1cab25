"""
Accelerated vs fixed sampling
=============================

The sampling modulus schedule controls recursion depth. A fixed modulus
shrinks the problem by a constant factor per round; the accelerated
schedule raises the modulus super-geometrically (v -> ceil(v^(5/4))) so
the round count collapses as processors are added.
"""

import numpy as np

from dcsa import BspConfig, Text, VSchedule, bsp_suffix_array

n = 1 << 16
text = Text(np.tile(np.asarray([0, 1, 2], dtype=np.int64), n // 3 + 1)[:n])

# p=16 would need n >= 16^(9/2) = 2^18 to satisfy the slack bound; p <= 8
# keeps the demo quick and already shows the crossover.
print(f"n={n} 3-periodic\n")
print("          schedule   p  rounds  moduli               W")
for p in (2, 4, 8):
    for name, sched in (("fixed:3", VSchedule.fixed(3)),
                        ("accelerated", VSchedule.accelerated())):
        sa, m = bsp_suffix_array(text, BspConfig(p=p), schedule=sched)
        vs = [r["v"] for r in m.rounds]
        print(f"{name:>18s} {p:3d} {len(m.rounds):7d}  {str(vs):18s} "
              f"{m.total['W']:9d}")

# Acceleration trades a slower early shrink (a bigger cover means more
# sample rows per position) for a collapsing round count. At p=2 it loses;
# by p=8 the fixed schedule needs half again as many rounds. The round
# count a processor budget tolerates grows only like log log p, which is
# the whole point of raising the modulus.

# Both schedules produce the same array, always; only the costs differ.
sa_f, _ = bsp_suffix_array(text, BspConfig(p=8), schedule=VSchedule.fixed(3))
sa_a, _ = bsp_suffix_array(text, BspConfig(p=8))
assert np.array_equal(sa_f, sa_a)
print("\nidentical suffix arrays from both schedules")
