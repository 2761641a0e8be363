"""
Learning curves on the synthetic datasets
=========================================

k-NN with k=5 on a 10^5 point pool per repeat; active and passive runs of
the same repeat share the pool and the test set.
"""

from reject_active import EngineConfig, LearnerSpec, learning_curve, make_pool, synth_oracle
import numpy as np

budgets = [200, 500, 1000, 2000]
repeats = 5


def make_config(budget, seed):
    return EngineConfig.build(budget, 2, learner=LearnerSpec("knn", knn_k=5), seed=seed)


for name in ("dasgupta1", "easyhard2", "gauss3"):
    oracle = synth_oracle(name)
    points = learning_curve(budgets, repeats, make_config,
                            lambda s: make_pool(oracle, 100_000, np.random.default_rng([2, s])))
    print(name)
    for p in points:
        print(f"  N={p.budget:5d} {p.mode:8s} precision {p.precision_mean:.4f} +- {p.precision_std:.4f}"
              f"  excess {p.excess_mean:.4f}  aborts {p.aborts}")
