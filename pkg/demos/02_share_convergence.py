#!/usr/bin/env python3
"""Watch the carrier-share iteration drive fractional shares to 0/1.

Blocks and activations are pinned so that a single user's carrier shares
iterate against fixed per-carrier rates (drawn descending, so the right
answer is always "keep the first cap-many carriers"). The multiplicative
update funnels the whole share budget into the top carriers; midway through,
simply rounding the largest shares already recovers the exact top set.
"""

import numpy as np

from caralloc import fig1_experiment, top_cap_indicator

M, CAP, ITERATIONS, SEED = 20, 3, 150, 0

trajectory = fig1_experiment(M, CAP, ITERATIONS, seed=SEED)

print(f"{M} carriers, cap {CAP}, {ITERATIONS} iterations\n")
print("iter  " + "  ".join(f"cc{m:<4d}" for m in range(6)) + " ...  sum")
for i in list(range(0, 20, 4)) + [30, 60, 100, 150]:
    row = trajectory[i]
    cells = "  ".join(f"{v:6.3f}" for v in row[:6])
    print(f"{i:4d}  {cells} ...  {row.sum():5.2f}")

final = trajectory[-1]
print("\nfinal shares are exactly 0/1:", set(np.unique(final)) <= {0.0, 1.0})
print("kept carriers:", np.flatnonzero(final == 1.0).tolist())

midway = top_cap_indicator(trajectory[15], CAP)
print("rounding at iteration 15 keeps:", np.flatnonzero(midway).tolist())
