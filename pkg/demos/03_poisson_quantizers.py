"""Poisson run lengths: rates as the design knob.

When run lengths are Poisson, the encoder chooses a rate per round
instead of a time; the decision statistic is the mean over copies, cut at
thresholds that hold both tails of every rate to half the error budget.
Durations re-enter through the square-root law t_j = sqrt(rate_j / rate_1).
"""

import math

from prdna import design_poisson, design_table, exact_error_probabilities

design = design_poisson(delta=0.02, copies=1, ell_max=10)
print(design_table(design))
print()

# The first rate is pinned by the deleted-run event: a run vanishes from
# a copy exactly when its Poisson draw is zero, and that must be a
# delta/2 event.
lam1 = design.rates[0]
print("first rate:", lam1, "= ln(2/delta) =", math.log(2 / 0.02))
print("P(zero draw) =", math.exp(-lam1), "= delta/2 =", 0.01)

# More copies shrink the required rate proportionally; everything else
# (thresholds on the sum, durations) is unchanged.
for copies in (1, 2, 5, 10):
    d = design_poisson(delta=0.02, copies=copies, ell_max=10)
    print(f"N={copies:2d}: rate_1 = {d.rates[0]:.6f}  t = "
          + ", ".join(f"{t:.2f}" for t in d.durations[:5]) + ", ...")

# Both tails stay within budget by construction.
errors = exact_error_probabilities(design)
print("max exact error:", max(errors), "<= 0.02")
