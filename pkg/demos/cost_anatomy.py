"""
Where the parallel work goes
============================

One accelerated run on a hard input, dissected round by round. Periodic
text is the stress case: at sampling modulus 3 a 3-periodic string makes
every sampled gram identical, so the duplicate-resolution machinery does
all the lifting.
"""

import numpy as np

from dcsa import BspConfig, Text, bsp_suffix_array, ledger_cost

n = 1 << 16
text = Text(np.tile(np.asarray([0, 1, 2], dtype=np.int64), n // 3 + 1)[:n])

p = 8
sa, metrics = bsp_suffix_array(text, BspConfig(p=p))

print(f"n={n} 3-periodic, p={p}, accelerated sampling\n")
print("round   v    d        n   steps          w          h")
for i, r in enumerate(metrics.rounds):
    print(f"{i:5d} {r['v']:3d} {r['d']:4d} {r['n']:8d} {r['supersteps']:7d}"
          f" {r['w']:10d} {r['h']:10d}")

total = metrics.total
tail_w = total["W"] - sum(r["w"] for r in metrics.rounds)
tail_s = total["S"] - sum(r["supersteps"] for r in metrics.rounds)
print(f"\nhandoff + assembly: {tail_s} supersteps, {tail_w} work")
print(f"totals: S={total['S']}  W={total['W']}  H={total['H']}")

# The scalar cost W + H*g + S*L depends on the machine you imagine running
# this on. Two ends of the spectrum:
for g, L in ((1, 100), (16, 100000)):
    print(f"cost at g={g:2d}, L={L:6d}: "
          f"{ledger_cost(total, g=g, L=L):>12.0f}")

# Sanity: the work per round shrinks as the problem does. The first round
# can be cheaper than the second (the sampling modulus jumps from 3 to 4,
# and a bigger cover means more rows per text position), but from round 1
# on the decay is monotone.
per = [r["w"] for r in metrics.rounds]
assert all(per[i + 1] <= per[i] for i in range(1, len(per) - 1))
print("\nper-round work decays monotonically after round 1")
