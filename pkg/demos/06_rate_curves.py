"""Achievable writing rates across channel parameters.

For each grid point: design the quantizer, build the schedule graph from
its durations, compute capacity and the expected round frequency, and
fold in the redundancy overhead.  Encoding only letter transitions tops
out at log2(3) bits per round; duration menus push past it.
"""

import math

from prdna import rate_curve, rate_curve_csv

print("binomial, 5 copies, 2% budget, duration cap 10, sweeping p:")
points = rate_curve(
    "binomial", "p", [0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95],
    delta=0.02, copies=5, max_duration=10,
)
print(rate_curve_csv(points))

best = max(pt.rate_bound for pt in points if pt.status == "ok")
print(f"best rate {best:.4f} vs letter-only limit log2(3) = {math.log2(3):.4f}")
print()

print("poisson, 2% budget, sweeping copy count (rate_1 shrinks as 1/N):")
print(rate_curve_csv(rate_curve("poisson", "N", list(range(1, 11)), delta=0.02)))
