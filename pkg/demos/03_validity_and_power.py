"""Type-I error and power under strong tail dependence.

Multivariate-t statistics share a chi-square divisor, so their p-values
stay dependent arbitrarily far in the tail (positive tail-dependence
coefficient).  Bonferroni grows very conservative there; combination
tests with tail index 1 keep their size and gain power.

Runs in ~10 s at the default desk-scale replication counts.
"""

import numpy as np

from heavycomb import (
    ExchangeableModel,
    ExperimentConfig,
    MethodSpec,
    estimate_rejection_rate,
    tail_dependence_t,
)

METHODS = (
    MethodSpec("standard", "cauchy", label="cauchy"),
    MethodSpec("standard", "trunc_t:1:0.9", label="truncated_t1"),
    MethodSpec("bonferroni", label="bonferroni"),
    MethodSpec("fisher", label="fisher"),
)

print("=== size under a t-copula (n = 5, nu = 2, one-sided, alpha = 0.05) ===")
print(f"{'rho':>5} {'lambda':>7} {'cauchy':>8} {'trunc_t1':>9} {'bonferroni':>11} {'fisher':>8}")
for rho in (0.0, 0.5, 0.9, 0.99):
    model = ExchangeableModel("student_t", 5, rho, nu=2, sided="one_sided")
    report = estimate_rejection_rate(
        ExperimentConfig(model, METHODS, (0.05,), 100_000, seed=1)
    )
    est = {r.method: r.estimate for r in report.rows}
    lam = tail_dependence_t(2, rho)
    print(f"{rho:>5} {lam:>7.2f} {est['cauchy']:>8.4f} {est['truncated_t1']:>9.4f} "
          f"{est['bonferroni']:>11.4f} {est['fisher']:>8.4f}")
print("Bonferroni shrinks below the nominal 0.05 as dependence grows;")
print("Fisher inflates; the heavy-tailed tests stay on target.\n")

print("=== power gap on dense signals (n = 100, rho = 0.9) ===")
two = (MethodSpec("standard", "cauchy", label="cauchy"),
       MethodSpec("bonferroni", label="bonferroni"))
print(f"{'mu':>4} {'cauchy':>8} {'bonferroni':>11} {'gap':>7}")
for mu in np.arange(0.0, 4.5, 0.5):
    model = ExchangeableModel("student_t", 100, 0.9, nu=2,
                              mean=tuple([float(mu)] * 100), sided="one_sided")
    report = estimate_rejection_rate(ExperimentConfig(model, two, (0.05,), 10_000, seed=2))
    est = {r.method: r.estimate for r in report.rows}
    print(f"{mu:>4} {est['cauchy']:>8.3f} {est['bonferroni']:>11.3f} "
          f"{est['cauchy'] - est['bonferroni']:>7.3f}")
