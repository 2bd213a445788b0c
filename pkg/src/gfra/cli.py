"""Command-line harness for the integrated scenario and the benchmarks."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import allocation as alloc
from . import estimation as est
from .gfsim import ADJACENT, ARBITRARY, GfConfig
from .harness import (
    RunReport,
    SUMMARY_SCHEMA_VERSION,
    TrainingSpec,
    emit,
    load_scenario,
    run_estimation_bench,
    run_failprob_bench,
    run_prediction_bench,
    run_scenario,
)


def _add_common(parser: argparse.ArgumentParser, require_config: bool = False) -> None:
    parser.add_argument("--config", type=Path, required=require_config, help="YAML config file")
    parser.add_argument("--out-dir", type=Path, default=Path("out"))
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--trials", type=int, default=None, help="override the trial count")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--cache-dir", type=Path, default=None, help="step-table cache directory")


def _bench_section(args: argparse.Namespace, section: str) -> dict:
    if args.config is None:
        return {}
    with open(args.config) as fh:
        raw = yaml.safe_load(fh) or {}
    out = raw.get(section, {}) or {}
    if args.seed is None and "seed" in raw:
        out.setdefault("seed", raw["seed"])
    return out


def _report(name: str, rows: list[dict], summary: dict) -> RunReport:
    report = RunReport(name)
    report.records = rows
    report.summary = {"schema_version": SUMMARY_SCHEMA_VERSION, "name": name, **summary}
    return report


def _cmd_run(args: argparse.Namespace) -> None:
    cfg = load_scenario(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
        overrides["seeds"] = None
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.cache_dir is not None:
        overrides["cache_dir"] = str(args.cache_dir)
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    report = run_scenario(cfg)
    for path in emit(report, args.format, args.out_dir):
        print(path)


def _cmd_bench_estimation(args: argparse.Namespace) -> None:
    opts = _bench_section(args, "estimation_bench")
    seed = args.seed if args.seed is not None else int(opts.get("seed", 0))
    trials = args.trials if args.trials is not None else int(opts.get("trials", 10_000))
    n_lo, n_hi = opts.get("n_range", (8, 18))
    result = run_estimation_bench(
        n_range=range(int(n_lo), int(n_hi) + 1),
        trials=trials,
        w=int(opts.get("w", 20)),
        t_slots=int(opts.get("t_slots", 8)),
        k=int(opts.get("k", 8)),
        seed=seed,
        bank=est.TableBank(args.cache_dir),
    )
    summary = {
        "w": result.w,
        "t_slots": result.t_slots,
        "k": result.k,
        "trials": trials,
        "seed": seed,
    }
    report = _report("estimation_bench", result.rows, summary)
    for path in emit(report, args.format, args.out_dir):
        print(path)


def _cmd_bench_failprob(args: argparse.Namespace) -> None:
    opts = _bench_section(args, "failprob_bench")
    seed = args.seed if args.seed is not None else int(opts.get("seed", 0))
    trials = args.trials if args.trials is not None else int(opts.get("trials", 1_000_000))
    w_lo, w_hi = opts.get("w_range", (7, 33))
    rows = run_failprob_bench(
        n_active=int(opts.get("n", 10)),
        t_slots=int(opts.get("t_slots", 8)),
        w_range=range(int(w_lo), int(w_hi) + 1),
        k_set=tuple(opts.get("k_set", (2, 4, 8))),
        trials=trials,
        seed=seed,
    )
    summary = {"trials": trials, "seed": seed}
    report = _report("failprob_bench", rows, summary)
    for path in emit(report, args.format, args.out_dir):
        print(path)


def _cmd_bench_prediction(args: argparse.Namespace) -> None:
    opts = _bench_section(args, "prediction_bench")
    seed = args.seed if args.seed is not None else int(opts.get("seed", 0))
    reps = args.trials if args.trials is not None else int(opts.get("replications", 50))
    result = run_prediction_bench(
        replications=reps,
        seed=seed,
        uniform_users=int(opts.get("uniform_users", 10)),
        n_cycles=int(opts.get("n_cycles", 32)),
        w=int(opts.get("w", 20)),
        masw_window=int(opts.get("masw_window", 3)),
        bank=est.TableBank(args.cache_dir),
    )
    summary = {
        "replications": reps,
        "seed": seed,
        "arima_mean_rel_error": result.arima_mre,
        "masw_mean_rel_error": result.masw_mre,
    }
    report = _report("prediction_bench", result.rows, summary)
    for path in emit(report, args.format, args.out_dir):
        print(path)


def _cmd_negotiate(args: argparse.Namespace) -> None:
    opts = _bench_section(args, "negotiation")
    cfg = GfConfig(
        w=int(opts.get("w_a", 26)) + int(opts.get("w_b", 20)),
        t_slots=int(opts.get("t_slots", 8)),
        k=int(opts.get("k", 8)),
        occupation=opts.get("occupation", ARBITRARY),
    )
    contracts = (
        alloc.QosContract(float(opts.get("reliability_a", 0.99))),
        alloc.QosContract(float(opts.get("reliability_b", 0.99999))),
    )
    result = alloc.negotiate_delta(
        w_a=int(opts.get("w_a", 26)),
        w_b=int(opts.get("w_b", 20)),
        pred_a=float(opts.get("n_a", 10)),
        pred_b=float(opts.get("n_b", 10)),
        contracts=contracts,
        cfg=cfg,
    )
    rows = [
        {"delta": float(d), "fail_A": float(fa), "fail_B": float(fb)}
        for d, fa, fb in zip(result.deltas, result.fail_a, result.fail_b)
    ]
    summary = {
        "delta": result.delta,
        "outage": result.outage,
    }
    report = _report("negotiation", rows, summary)
    for path in emit(report, args.format, args.out_dir):
        print(path)


def _cmd_table_cache(args: argparse.Namespace) -> None:
    opts = _bench_section(args, "table_cache")
    cache_dir = args.cache_dir or Path(opts.get("dir", "table_cache"))
    bank = est.TableBank(cache_dir)
    built = []
    for w in opts.get("single_slot_w", [20]):
        table = bank.single_slot(int(w))
        built.append(str(Path(cache_dir) / table.cache_name()))
    for spec in opts.get("whole_cycle", [{"w": 20, "t_slots": 8, "k": 8}]):
        table = bank.whole_cycle(int(spec["w"]), int(spec["t_slots"]), int(spec["k"]))
        built.append(str(Path(cache_dir) / table.cache_name()))
    for path in built:
        print(path)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gfra",
        description="K-repetition grant-free access: estimation, prediction, allocation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrated three-tier scenario")
    _add_common(p_run, require_config=True)
    p_run.set_defaults(func=_cmd_run)

    for name, func, helptext in (
        ("bench-estimation", _cmd_bench_estimation, "estimator accuracy sweep"),
        ("bench-failprob", _cmd_bench_failprob, "analytical vs Monte Carlo failure probability"),
        ("bench-prediction", _cmd_bench_prediction, "forecasting accuracy sweep"),
        ("negotiate", _cmd_negotiate, "RB transfer-fraction sweep"),
        ("table-cache", _cmd_table_cache, "pre-build step-probability tables"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        p.set_defaults(func=func)

    args = parser.parse_args(argv)
    try:
        args.func(args)
        return 0
    except Exception as err:  # surfaced as machine-readable JSON per contract
        print(
            json.dumps({"error": type(err).__name__, "message": str(err)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
