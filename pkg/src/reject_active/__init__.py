"""Active learning with uncertain regions estimated by rejection thresholds."""

from .core import Dataset, LabeledPoint, BudgetTracker, Schedule, schedule_init, schedule_step
from .estimators import (
    EtaEstimator, HistogramEstimator, KnnEstimator, LinearEstimator, LearnerSpec,
    hist_fit, knn_fit, linear_fit, predict_eta, score,
)
from .rejection import RegionChain, RandomizationConfig, randomize_scores, empirical_quantile, region_contains, region_extend
from .oracles import SyntheticSpec, SyntheticOracle, PoolOracle, synth_oracle, make_pool, load_csv, sample_conditional
from .engine import EngineConfig, PiecewiseModel, RunResult, run_active, run_passive, piecewise_predict, evaluate, excess_risk
from .bench import CurvePoint, RateFit, learning_curve, rate_fit, rate_check

__version__ = "0.1.0"
