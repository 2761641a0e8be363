"""Command-line harness.

Subcommands: ``run`` (one active or passive run), ``curve`` (active vs passive
learning curves), ``rate-check`` (log-log excess-risk slope) and ``gen-data``
(write a synthetic sample as CSV). Exit status is 0 on success, 1 on bad
options or configuration and 2 when a run aborts or output cannot be written.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import bench
from .core import MODES, PRACTICAL
from .engine import EngineConfig, run_active, run_passive
from .errors import ConfigurationError, LoadError, RejectActiveError
from .estimators import HIST_FORMS, LEARNERS, LearnerSpec
from .oracles import SYNTHETIC, SyntheticSpec, load_csv, make_pool, synth_oracle

log = logging.getLogger("reject_active")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_common(p):
    p.add_argument("--dataset", choices=SYNTHETIC + ("csv",), default="sine")
    p.add_argument("--csv-path")
    p.add_argument("--label-col", default="-1", help="header name or 0-based index (default: last)")
    p.add_argument("--test-frac", type=float, default=0.2, help="held-out fraction for CSV pools")
    p.add_argument("--sigma", type=float, default=0.3, help="gauss3 component width")
    p.add_argument("--learner", choices=LEARNERS, default="linear")
    p.add_argument("--knn-k", type=int, default=5)
    p.add_argument("--hist-r", type=float, default=None)
    p.add_argument("--hist-form", choices=HIST_FORMS, default="count_ratio")
    p.add_argument("--mode", choices=MODES, default=PRACTICAL)
    p.add_argument("--cn", type=float, default=1.2)
    p.add_argument("--ceps", type=float, default=0.95)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--n0-mult", type=int, default=None)
    p.add_argument("--mk", type=int, default=150)
    p.add_argument("--u", type=float, default=1e-5)
    p.add_argument("--recycle-labeled", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--recycle-unlabeled", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--pool-size", type=int, default=100_000,
                   help="finite pool drawn from a synthetic dataset; 0 samples the distribution directly")
    p.add_argument("--test-size", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reject-active", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="one run; JSON result or per-step CSV trace")
    _add_common(p)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--passive", action="store_true", help="run the passive baseline instead")

    p = sub.add_parser("curve", help="active vs passive learning curves as CSV")
    _add_common(p)
    p.add_argument("--budgets", type=_int_list, required=True)
    p.add_argument("--repeats", type=int, default=10)

    p = sub.add_parser("rate-check", help="excess-risk slope, histogram learner, sine oracle")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--budgets", type=_int_list, default=[500, 1000, 2000, 4000, 8000, 16000])
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--cn", type=float, default=1.2)
    p.add_argument("--n0-mult", type=int, default=1)
    p.add_argument("--hist-form", choices=HIST_FORMS, default="count_ratio")
    p.add_argument("--recycle-labeled", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--recycle-unlabeled", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--test-size", type=int, default=50_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("gen-data", help="write a synthetic sample as CSV")
    p.add_argument("--dataset", choices=SYNTHETIC, default="sine")
    p.add_argument("--d", type=int, default=2, help="dimension (sine only)")
    p.add_argument("--sigma", type=float, default=0.3)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--with-eta", action="store_true", help="append the true eta column")
    p.add_argument("--out")
    return parser


def _learner(args):
    return LearnerSpec(args.learner, knn_k=args.knn_k, hist_r=args.hist_r, hist_form=args.hist_form)


def _oracle_factory(args):
    """Returns (dimension, seed -> oracle)."""
    if args.dataset == "csv":
        if not args.csv_path:
            raise ConfigurationError("--dataset csv needs --csv-path")
        base = load_csv(args.csv_path, args.label_col, normalize=True)
        return base.d, lambda s: base.split_test(args.test_frac, np.random.default_rng([2, s]))
    spec = SyntheticSpec(args.dataset, sigma=args.sigma)
    oracle = synth_oracle(spec)
    if args.pool_size < 0:
        raise ConfigurationError("--pool-size must be >= 0")
    if args.pool_size == 0:
        return oracle.d, lambda s: oracle
    return oracle.d, lambda s: make_pool(oracle, args.pool_size, np.random.default_rng([2, s]), args.test_size)


def _config_factory(args, d):
    learner = _learner(args)

    def make(budget, seed):
        return EngineConfig.build(
            budget, d, args.mode, c_N=args.cn, c_eps=args.ceps, delta=args.delta,
            n0_multiplier=args.n0_mult, learner=learner, m_k=args.mk, u=args.u,
            recycle_labeled=args.recycle_labeled, recycle_unlabeled=args.recycle_unlabeled,
            seed=seed, test_size=args.test_size,
        )

    return make


def _write_text(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args):
    d, make_oracle = _oracle_factory(args)
    cfg = _config_factory(args, d)(args.budget, args.seed)
    result = (run_passive if args.passive else run_active)(cfg, make_oracle(args.seed))
    if args.out and args.out.endswith(".csv"):
        bench.emit_trace_csv(result, args.out)
    else:
        record = result.to_dict()
        record["config"] = cfg.to_dict()
        record["dataset"] = args.dataset
        _write_text(json.dumps(record, indent=2) + "\n", args.out)
    return 0 if result.complete else 2


def cmd_curve(args):
    d, make_oracle = _oracle_factory(args)
    points = bench.learning_curve(args.budgets, args.repeats, _config_factory(args, d), make_oracle, args.seed)
    if args.out and args.out.endswith(".json"):
        bench.emit_json(bench.curve_records(points), args.out)
    elif args.out:
        bench.emit_curve_csv(points, args.out)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(bench.CURVE_FIELDS)
        for p in points:
            w.writerow([bench._cell(getattr(p, f)) for f in bench.CURVE_FIELDS])
    return 0


def cmd_rate_check(args):
    if len(args.budgets) < 3:
        raise ConfigurationError("rate-check needs at least three budgets")
    report = bench.rate_check(
        d=args.d, budgets=args.budgets, repeats=args.repeats, seed=args.seed,
        test_size=args.test_size, delta=args.delta, c_N=args.cn, n0_multiplier=args.n0_mult,
        learner=LearnerSpec("histogram", hist_form=args.hist_form),
        recycle_labeled=args.recycle_labeled, recycle_unlabeled=args.recycle_unlabeled,
    )
    _write_text(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def cmd_gen_data(args):
    if args.n < 1:
        raise ConfigurationError("--n must be positive")
    spec = SyntheticSpec(args.dataset, d=args.d if args.dataset == "sine" else 2, sigma=args.sigma)
    data = synth_oracle(spec).sample(args.n, np.random.default_rng(args.seed))
    header = [f"x{i + 1}" for i in range(data.d)] + ["label"] + (["eta"] if args.with_eta else [])
    fh = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(len(data)):
            row = [repr(float(v)) for v in data.X[i]] + [str(int(data.y[i]))]
            if args.with_eta:
                row.append(repr(float(data.eta[i])))
            w.writerow(row)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


COMMANDS = {"run": cmd_run, "curve": cmd_curve, "rate-check": cmd_rate_check, "gen-data": cmd_gen_data}


def _setup_logging():
    level = os.environ.get("REJECT_ACTIVE_LOG", "error").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, LoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RejectActiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
