#!/usr/bin/env python3
"""End-to-end separation of bounded sources from noiseless mixtures.

Three uniform sources in the signed unit box are mixed through a random
5 x 3 Gaussian matrix. Knowing only the mixtures and the box, the solver
maximizes the LD-mutual information between mixtures and the constrained
source estimate by projected gradient ascent, and the aligned SINR against
the hidden ground truth shows the recovery quality.
"""

import numpy as np

from ldinfomax import (
    ScenarioConfig,
    SolverConfig,
    evaluate,
    make_scenario,
    preset,
    run,
    write_trajectory_csv,
)

box = preset("linf", 3)
scenario_cfg = ScenarioConfig(
    r=3, m=5, n=2000, rho=0.0, snr_db=None,
    polytope=box, seed=11, source_mode="uniform_iid",
)
scenario = make_scenario(scenario_cfg)
print(f"mixed {scenario_cfg.r} hidden sources into {scenario_cfg.m} noiseless "
      f"channels ({scenario_cfg.n} samples)")

solver_cfg = SolverConfig(iterations=5000, record_every=500, seed=11)
state = run(scenario.y, box, solver_cfg, ground_truth=scenario.s_true)

print("\niteration   objective   SINR of estimate (dB)")
for pt in state.trajectory:
    print(f"{pt.iteration:9d}   {pt.objective:9.3f}   {pt.sinr_db:8.2f}")

report = evaluate(state.estimate, scenario.s_true)
print(f"\nfinal SINR: {report.sinr_db:.1f} dB, MSE {report.mse:.2e}")
print(f"row matching: perm {report.alignment.perm}, signs {report.alignment.signs}")
print(f"per-source correlations: {np.round(report.per_source_corr, 4)}")

write_trajectory_csv(state, "separation_trajectory.csv")
print("\nwrote separation_trajectory.csv (iteration, objective, sinr_db)")
