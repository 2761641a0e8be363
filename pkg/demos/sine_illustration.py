"""
Active vs passive on the sine regression function
=================================================

Two-dimensional uniform marginal, eta depends on the second coordinate only.
The linear learner sees 5000 labels either way.
"""

import numpy as np

from reject_active import EngineConfig, LearnerSpec, run_active, run_passive, synth_oracle

oracle = synth_oracle("sine")
cfg = EngineConfig.build(5000, 2, learner=LearnerSpec("linear"), seed=0)

# the active run keeps a per-step trace of the schedule and the fitted thresholds
active = run_active(cfg, oracle)
print(" k    N_k   eps_k  eps_hat  lambda   labels  used")
for s in active.steps:
    lam = "" if s.lambda_k is None else f"{s.lambda_k:.5f}"
    print(f"{s.k:2d} {s.N_k:6d} {s.eps_k:7.3f} {s.eps_hat_k:8.3f} {lam:>8} {s.labels_requested:7d} {s.budget_used:5d}")

passive = run_passive(cfg, oracle)
print("active precision ", active.metrics["precision"], " excess", active.metrics["excess_risk"])
print("passive precision", passive.metrics["precision"], " excess", passive.metrics["excess_risk"])

# where do test points leave the chain? early exits are the confident ones
X = np.random.default_rng(1).random((20000, 2))
stage = active.model.stage_of(X)
print("points per final stage:", np.bincount(stage, minlength=len(active.model.stages)))
