"""Benchmark harness: active vs passive learning curves, log-log rate fits
and CSV/JSON writers."""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .engine import TRACE_FIELDS, EngineConfig, RunResult, run_active, run_passive
from .errors import FitError, InputError
from .estimators import LearnerSpec
from .oracles import Oracle, SyntheticSpec, synth_oracle

log = logging.getLogger(__name__)

CURVE_FIELDS = ("budget", "mode", "repeats", "precision_mean", "precision_std",
                "excess_mean", "excess_std", "aborts")

RUNNERS = {"active": run_active, "passive": run_passive}


@dataclass
class CurvePoint:
    budget: int
    mode: str
    repeats: int
    precision_mean: float | None
    precision_std: float | None
    excess_mean: float | None = None
    excess_std: float | None = None
    aborts: int = 0
    runs: list = field(default_factory=list, repr=False)


def _mean_std(values):
    if not values:
        return None, None
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def aggregate(budget: int, mode: str, runs: list[RunResult]) -> CurvePoint:
    """Summarize per-seed runs; runs that aborted are counted, not averaged."""
    ok = [r for r in runs if r.complete and r.model is not None]
    prec_mean, prec_std = _mean_std([r.metrics["precision"] for r in ok])
    excess = [r.metrics.get("excess_risk") for r in ok]
    ex_mean = ex_std = None
    if excess and all(e is not None for e in excess):
        ex_mean, ex_std = _mean_std(excess)
    return CurvePoint(budget, mode, len(runs), prec_mean, prec_std, ex_mean, ex_std,
                      len(runs) - len(ok), runs)


def learning_curve(
    budgets: Iterable[int],
    repeats: int,
    make_config: Callable[[int, int], EngineConfig],
    make_oracle: Callable[[int], Oracle],
    seed: int = 0,
    modes: tuple = ("active", "passive"),
) -> list[CurvePoint]:
    """Run every (budget, mode) cell ``repeats`` times.

    Repeat ``i`` uses seed ``seed + i`` for both the config and the oracle, so
    active and passive runs of the same repeat see the same pool and test set.
    """
    budgets = [int(b) for b in budgets]
    if repeats < 1:
        raise InputError("repeats must be at least 1")
    if budgets != sorted(budgets):
        raise InputError("budgets must be ascending")
    points = []
    for budget in budgets:
        for mode in modes:
            runs = []
            for i in range(repeats):
                s = seed + i
                result = RUNNERS[mode](make_config(budget, s), make_oracle(s))
                if not result.complete:
                    log.info("budget %d %s seed %d aborted: %s", budget, mode, s, result.abort_reason)
                runs.append(result)
            points.append(aggregate(budget, mode, runs))
            log.info("budget %d %s: precision %s", budget, mode, points[-1].precision_mean)
    return points


@dataclass
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points: list

    def to_dict(self):
        return asdict(self)


def rate_fit(points) -> RateFit:
    """Least-squares line through (ln N, ln excess risk)."""
    pts = [(float(n), float(e)) for n, e in points]
    if sum(1 for _, e in pts if e > 0) < 3:
        raise FitError("need at least three points with positive excess risk")
    floor = np.finfo(float).eps
    if any(e <= 0 for _, e in pts):
        warnings.warn("zero excess risk replaced by machine epsilon", RuntimeWarning, stacklevel=2)
    x = np.log([n for n, _ in pts])
    y = np.log([max(e, floor) for _, e in pts])
    xc, yc = x - x.mean(), y - y.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise FitError("budgets must not all be equal")
    slope = float(xc @ yc) / sxx
    intercept = float(y.mean() - slope * x.mean())
    ss_tot = float(yc @ yc)
    resid = y - (intercept + slope * x)
    r2 = 1.0 if ss_tot == 0 else float(min(1.0, max(0.0, 1.0 - (resid @ resid) / ss_tot)))
    return RateFit(slope, intercept, r2, [[float(a), float(b)] for a, b in zip(x, y)])


def rate_check(
    d: int = 1,
    budgets=(500, 1000, 2000, 4000, 8000, 16000),
    repeats: int = 10,
    seed: int = 0,
    test_size: int = 50_000,
    delta: float = 0.05,
    c_N: float = 1.2,
    n0_multiplier: int = 1,
    learner: LearnerSpec | None = None,
    **engine_kwargs,
) -> dict:
    """Fit the decay of mean excess risk with the budget on the d-dimensional
    sine oracle, histogram learner, theoretical schedule."""
    learner = learner or LearnerSpec("histogram")
    oracle = synth_oracle(SyntheticSpec("sine", d=d))

    def make_config(budget, s):
        return EngineConfig.build(budget, d, "theoretical", c_N=c_N, delta=delta,
                                  n0_multiplier=n0_multiplier, learner=learner, seed=s,
                                  test_size=test_size, **engine_kwargs)

    curve = learning_curve(budgets, repeats, make_config, lambda s: oracle, seed)
    out = {"d": d, "budgets": list(budgets), "repeats": repeats, "seed": seed,
           "target_slope": -2.0 / (1 + d), "passive_slope": -2.0 / (2 + d)}
    for mode in ("active", "passive"):
        rows = [p for p in curve if p.mode == mode]
        out[mode] = rate_fit([(p.budget, p.excess_mean) for p in rows]).to_dict()
        out[mode]["excess_mean"] = [p.excess_mean for p in rows]
    return out


# ---------------------------------------------------------------- writers


def _cell(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def trace_rows(result: RunResult) -> list[list[str]]:
    rows = [[_cell(getattr(s, f)) for f in TRACE_FIELDS] for s in result.steps]
    total = sum(s.labels_requested for s in result.steps)
    rows.append(["total", "", "", "", "", str(total), str(result.budget_used)])
    return rows


def emit_trace_csv(result: RunResult, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_FIELDS)
        w.writerows(trace_rows(result))


def emit_curve_csv(points: list[CurvePoint], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_FIELDS)
        for p in points:
            w.writerow([_cell(getattr(p, f)) for f in CURVE_FIELDS])


def curve_records(points: list[CurvePoint]) -> list[dict]:
    return [{f: getattr(p, f) for f in CURVE_FIELDS} for p in points]


def emit_json(record, path) -> None:
    Path(path).write_text(json.dumps(record, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def load_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
