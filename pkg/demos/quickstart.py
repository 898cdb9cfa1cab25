"""
Build a suffix array three ways and read it back
================================================

The library's three builders agree on every input; they differ in how the
work is organized and what they can tell you about it afterwards.
"""

import numpy as np

from dcsa import (BspConfig, bsp_suffix_array, dc_suffix_array, encode_bytes,
                  naive_suffix_array, verify_suffix_array)

# Any byte string works. Rank encoding maps the distinct bytes to a dense
# integer alphabet without disturbing suffix order.
raw = b"the quick brown fox jumps over the lazy dog"
text = encode_bytes(raw)
print(f"{len(text)} characters, alphabet size {int(text.chars.max()) + 1}")

# The oracle: sort the suffixes directly. Fine for small inputs, quadratic
# in the worst case, and the standard against which everything is tested.
sa_naive = naive_suffix_array(text)

# The real sequential builder: difference-cover sampling with recursion.
sa_dc = dc_suffix_array(text)

# The parallel builder runs on a simulated 4-processor machine. The text
# here is far below the sampling slack bound, so ask for relaxed mode.
sa_bsp, metrics = bsp_suffix_array(text, BspConfig(p=4),
                                   slack_policy="relaxed")

assert np.array_equal(sa_naive, sa_dc)
assert np.array_equal(sa_naive, sa_bsp)
assert verify_suffix_array(text, sa_dc)
print("all three builders agree and the result verifies")

# A suffix array read top to bottom lists the suffixes in sorted order.
print("\nfirst ten suffixes in order:")
for rank, start in enumerate(sa_naive[:10].tolist()):
    print(f"  {rank:2d}  sa[{rank:2d}] = {start:2d}  {raw[start:start + 16]!r}")

# The parallel run also hands back its cost ledger: how many supersteps the
# machine took, the work and traffic per superstep, and per-round slices.
total = metrics.total
print(f"\nparallel run: {len(metrics.rounds)} recursion rounds, "
      f"S={total['S']} supersteps, W={total['W']} work, "
      f"H={total['H']} words moved")
for w in metrics.warnings:
    print(f"  note: {w}")
