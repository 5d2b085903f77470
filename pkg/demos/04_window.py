"""Where the distinctness radius falls, and how many cycles a ball carries.

The radius window [R_-, R_+ + 1] is asymptotic; a short scan shows where
r_distinct + 1 lands for moderate n.  The collision table compares the mean
number of cycles in B_R(s) with its domination bound.
"""

from __future__ import annotations

from shotgun.harness import ExperimentConfig, collision_stats, radius_formulas, threshold_scan

for n in (1000, 10_000):
    print(n, radius_formulas(n, 3, 10))

rows = threshold_scan(ExperimentConfig(n=[1000, 10_000], d=[3], r_policy="plus", samples=5))
for r in rows:
    print(f"n={r.n} seed={r.seed}: r_distinct={r.r_distinct}, in window: {r.in_window}, {r.seconds}s")

cfg = ExperimentConfig(n=[10_000], d=[3], r_policy="plus", samples=2000, sources=[1, 2])
for r in collision_stats(cfg):
    print(f"|s|={r.sources} R={r.R}: mean gamma {r.mean_gamma:.3f}  bound {r.bound:.3f}  "
          f"max {r.max_gamma}  threshold {r.threshold:.0f}")
