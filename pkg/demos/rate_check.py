"""
Excess-risk decay with the label budget
=======================================

Histogram learner, theoretical schedule, one-dimensional sine oracle. The
slope of log mean excess risk against log N is compared with -2/(1+d) and
with the passive rate -2/(2+d). Takes a few minutes.
"""

from reject_active import rate_check

rep = rate_check(d=1, budgets=(500, 1000, 2000, 4000, 8000, 16000), repeats=10, seed=0)
print("target slope ", rep["target_slope"], " passive rate", round(rep["passive_slope"], 3))
for mode in ("active", "passive"):
    fit = rep[mode]
    print(f"{mode:8s} slope {fit['slope']:.3f}  R^2 {fit['r_squared']:.3f}")
    print("         excess", [round(e, 5) for e in fit["excess_mean"]])

# the theoretical eps_k stays at 1 for these budgets, so active sampling
# rarely shrinks the region; see the README for the discussion
