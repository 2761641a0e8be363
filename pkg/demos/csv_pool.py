"""
Running on a CSV dataset
========================

Writes a synthetic gauss3 sample to CSV, reloads it as a finite pool with a
20% held-out test split and compares active and passive k-NN. Pass a path
and a label column to use your own file instead.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from reject_active import EngineConfig, LearnerSpec, load_csv, run_active, run_passive, synth_oracle

if len(sys.argv) > 1:
    path, label = sys.argv[1], (sys.argv[2] if len(sys.argv) > 2 else "-1")
else:
    data = synth_oracle("gauss3").sample(4000, np.random.default_rng(0))
    path = Path(tempfile.mkdtemp()) / "gauss3.csv"
    rows = ["x1,x2,label"] + [f"{a!r},{b!r},{y}" for (a, b), y in zip(data.X.tolist(), data.y.tolist())]
    path.write_text("\n".join(rows) + "\n")
    label = "label"

pool = load_csv(path, label)
print("rows", len(pool), "features", pool.d, "positive rate", pool.data.y.mean())
pool = pool.split_test(0.2, np.random.default_rng(1))

for budget in (100, 300, 1000):
    cfg = EngineConfig.build(budget, pool.d, learner=LearnerSpec("knn", knn_k=5), seed=0)
    a = run_active(cfg, pool)
    p = run_passive(cfg, pool)
    print(f"N={budget:5d} active {a.metrics['precision']:.4f} ({'ok' if a.complete else a.abort_reason})"
          f"  passive {p.metrics['precision']:.4f}")
