"""
Error rates when one variance changes
=====================================

We first find a common standard deviation at which the ranking procedure
has 90% power on unit-spaced means. Then one group's standard deviation is
scaled up while the others stay fixed, and false verifications are counted.
"""

from rankverify import SimConfig, calibrate_sigma, run_inflation_grid
from rankverify.simulation import spaced_means

cfg = SimConfig(n_draws=10_000, alpha=0.05, seed=1, procedure="ranking", k=1)
cal = calibrate_sigma(spaced_means(5), 0.9, cfg)
print(f"sigma_bar = {cal.sigma:.4f}, power = {cal.power:.3f} after {cal.evaluations} runs")

###############################################################################
# Type I error: the first two means are tied, so any verified claim about
# the winner is false. The rate stays within Monte-Carlo error of alpha.

tied = SimConfig(10_000, 0.05, 2, "ranking", 1, "type1_tied")
for cell in run_inflation_grid(tied, cal.sigma, ranks=(2,)):
    print(f"sd_2 = {cell.multiplier:>4.0f} x sigma_bar: rate {cell.report.estimate:.4f}")

###############################################################################
# Type II error for a deeper claim (top 3 in order) grows as the second
# group gets noisier.

deep = SimConfig(10_000, 0.05, 2, "ranking", 3, "type2")
cal3 = calibrate_sigma(spaced_means(5), 0.9, SimConfig(10_000, 0.05, 1, "ranking", 3))
for cell in run_inflation_grid(deep, cal3.sigma, ranks=(2,)):
    r = cell.report
    print(f"sd_2 = {cell.multiplier:.1f} x sigma_bar: type II {r.estimate:.3f} +- {r.mc_standard_error:.3f}")
