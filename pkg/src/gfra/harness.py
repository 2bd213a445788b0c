"""Scenario configuration, the per-cycle three-tier loop, and benchmarks.

Each scheduling cycle runs observe -> estimate -> predict -> allocate for
two service classes (bursty event A, uniform event B) on disjoint RB
partitions, then simulates the next cycle's access on the allocated split.
Benchmarks reproduce the estimation-accuracy, failure-probability,
prediction, and negotiation experiments at desk scale and write
deterministic CSV/JSON outputs.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from . import allocation as alloc
from . import estimation as est
from . import prediction as pred
from ._util import philox_stream, round_half_up
from .gfsim import ADJACENT, ARBITRARY, CycleObservation, GfConfig, simulate_cycle
from .traffic import ArrivalTrace, BetaBurstSpec, UniformSpec, beta_arrivals, uniform_arrivals

SCHEME_ADAPTIVE = "adaptive"
SCHEME_FAP = "fap"
SCHEME_FIP_MIN = "fip_min"
SCHEME_FIP_IDE = "fip_ide"
ALLOCATION_SCHEMES = (SCHEME_ADAPTIVE, SCHEME_FAP, SCHEME_FIP_MIN, SCHEME_FIP_IDE)

PREDICTOR_ARIMA = "arima"
PREDICTOR_MASW = "masw"

EVENT_BURSTY = "bursty"
EVENT_UNIFORM = "uniform"

SUMMARY_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrainingSpec:
    """How the offline forecasting-model training series is produced.

    The burst batch re-activates `passes` times back to back; a single pass
    yields too few cycles for a stable coefficient fit.
    """

    n_total: int = 100
    duration_ms: float = 20.0
    w: int = 20
    seed_offset: int = 1
    passes: int = 4


@dataclass(frozen=True)
class PredictionConfig:
    order: tuple[int, int, int] = (0, 2, 3)
    masw_window: int = 3
    training: TrainingSpec = TrainingSpec()
    refit_every: int = 0  # cycles between refits; 0 = never refit


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    gf: GfConfig
    traffic_a: BetaBurstSpec | UniformSpec
    traffic_b: UniformSpec
    contracts: tuple[alloc.QosContract, alloc.QosContract]
    w_all: int = 48
    scheme: str = SCHEME_ADAPTIVE
    estimator: str = est.SS_ML_LS
    predictor: str = PREDICTOR_ARIMA
    seed: int = 0
    seeds: Optional[tuple[int, ...]] = None
    trials: int = 200
    n_cycles: int = 32
    burst_start_ms: float = 10.0
    delay_truncation_ms: float = 10.0
    warmup_cycles: int = 5
    floor_rbs: int = alloc.DEFAULT_IDLE_FLOOR
    prediction: PredictionConfig = PredictionConfig()
    cache_dir: Optional[str] = None

    def __post_init__(self) -> None:
        if self.w_all < 1:
            raise ConfigError("w_all must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.delay_truncation_ms <= 0:
            raise ConfigError("delay_truncation_ms must be > 0")
        if self.scheme not in ALLOCATION_SCHEMES:
            raise ConfigError(f"unknown allocation scheme {self.scheme!r}")
        if self.estimator not in est.SCHEMES:
            raise ConfigError(f"unknown estimator {self.estimator!r}")
        if self.predictor not in (PREDICTOR_ARIMA, PREDICTOR_MASW):
            raise ConfigError(f"unknown predictor {self.predictor!r}")
        adjacent_only = (est.SS_ML_LS, est.MS_MLI, est.MSEM)
        if self.estimator in adjacent_only and self.gf.occupation != ADJACENT:
            raise ConfigError(f"{self.estimator} requires adjacent occupation")
        if self.estimator == est.MS_MLD and self.gf.occupation != ARBITRARY:
            raise ConfigError("ms_mld requires arbitrary occupation")

    @property
    def trial_seeds(self) -> tuple[int, ...]:
        if self.seeds is not None:
            return self.seeds
        return tuple(self.seed + i for i in range(self.trials))

    @property
    def burst_start_cycle(self) -> int:
        return int(round(self.burst_start_ms / self.gf.cycle_ms))


def _traffic_from_dict(raw: dict, cycle_len_ms: float):
    kind = raw.get("kind")
    if kind == "beta":
        return BetaBurstSpec(
            n_total=int(raw["n_total"]),
            duration_ms=float(raw["duration_ms"]),
            alpha=float(raw.get("alpha", 3.0)),
            beta=float(raw.get("beta", 4.0)),
            cycle_len_ms=float(raw.get("cycle_len_ms", cycle_len_ms)),
        )
    if kind == "uniform":
        return UniformSpec(users_per_cycle=int(raw["users_per_cycle"]))
    raise ConfigError(f"unknown traffic kind {kind!r}")


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse a YAML scenario file into a validated ScenarioConfig."""
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    try:
        gf_raw = raw.get("gf", {})
        gf = GfConfig(
            w=int(raw.get("w_all", 48)),
            t_slots=int(gf_raw.get("t_slots", 8)),
            k=int(gf_raw.get("k", 8)),
            occupation=gf_raw.get("occupation", ADJACENT),
            slot_ms=float(gf_raw.get("slot_ms", 0.125)),
            gap_slots=int(gf_raw.get("gap_slots", 2)),
        )
        contracts_raw = raw["contracts"]

        def contract(d: dict) -> alloc.QosContract:
            ideal = d.get("reliability_ideal")
            return alloc.QosContract(
                reliability_min=float(d["reliability_min"]),
                reliability_ideal=float(ideal) if ideal is not None else None,
                priority=int(d.get("priority", 0)),
            )

        pred_raw = raw.get("prediction", {})
        order_raw = pred_raw.get("order", {})
        training_raw = pred_raw.get("training", {})
        prediction = PredictionConfig(
            order=(
                int(order_raw.get("p", 0)),
                int(order_raw.get("d", 2)),
                int(order_raw.get("q", 3)),
            ),
            masw_window=int(pred_raw.get("masw_window", 3)),
            training=TrainingSpec(
                n_total=int(training_raw.get("n_total", 100)),
                duration_ms=float(training_raw.get("duration_ms", 20.0)),
                w=int(training_raw.get("w", 20)),
                seed_offset=int(training_raw.get("seed_offset", 1)),
            ),
            refit_every=int(pred_raw.get("refit_every", 0)),
        )
        seeds = raw.get("seeds")
        return ScenarioConfig(
            name=str(raw.get("name", Path(path).stem)),
            gf=gf,
            traffic_a=_traffic_from_dict(raw["traffic_a"], gf.cycle_ms),
            traffic_b=_traffic_from_dict(raw["traffic_b"], gf.cycle_ms),
            contracts=(contract(contracts_raw["a"]), contract(contracts_raw["b"])),
            w_all=int(raw.get("w_all", 48)),
            scheme=raw.get("scheme", SCHEME_ADAPTIVE),
            estimator=raw.get("estimator", est.SS_ML_LS),
            predictor=raw.get("predictor", PREDICTOR_ARIMA),
            seed=int(raw.get("seed", 0)),
            seeds=tuple(int(s) for s in seeds) if seeds else None,
            trials=int(raw.get("trials", 200)),
            n_cycles=int(raw.get("n_cycles", 32)),
            burst_start_ms=float(raw.get("burst_start_ms", 10.0)),
            delay_truncation_ms=float(raw.get("delay_truncation_ms", 10.0)),
            warmup_cycles=int(raw.get("warmup_cycles", 5)),
            floor_rbs=int(raw.get("floor_rbs", alloc.DEFAULT_IDLE_FLOOR)),
            prediction=prediction,
            cache_dir=raw.get("cache_dir"),
        )
    except KeyError as err:
        raise ConfigError(f"missing config key: {err}") from err


# ---------------------------------------------------------------------------
# Delay curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CcdfCurve:
    """Complementary CDF of success delay on a slot-resolution grid.

    Unserved users carry infinite delay, so they stay in the tail mass at
    every grid point.
    """

    delay_ms: np.ndarray
    ccdf: np.ndarray
    n_users: int

    @classmethod
    def from_delays(
        cls, delays: Sequence[float], max_ms: float, step_ms: float
    ) -> "CcdfCurve":
        arr = np.asarray(list(delays), dtype=float)
        grid = np.round(np.arange(0.0, max_ms + step_ms / 2, step_ms), 9)
        if arr.size == 0:
            return cls(grid, np.zeros_like(grid), 0)
        ccdf = np.array([(arr > d).mean() for d in grid])
        return cls(grid, ccdf, int(arr.size))

    def reliability_at(self, delay_ms: float) -> float:
        """Fraction of users served within `delay_ms` (1 - tail mass)."""
        idx = np.searchsorted(self.delay_ms, delay_ms + 1e-12) - 1
        if idx < 0:
            return 0.0
        return 1.0 - float(self.ccdf[idx])


# ---------------------------------------------------------------------------
# The integrated scenario loop
# ---------------------------------------------------------------------------


@dataclass
class RunReport:
    name: str
    records: list[dict] = field(default_factory=list)
    ccdfs: dict[str, CcdfCurve] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def make_training_series(
    seed: int,
    training: TrainingSpec,
    gf: GfConfig,
    estimator: str = est.SS_ML_LS,
    bank: Optional[est.TableBank] = None,
) -> np.ndarray:
    """Per-cycle load estimates for a solitary burst, used to fit forecasts.

    Simulates the burst through the access procedure (retries included) and
    estimates each cycle's active count from its observation, mirroring how
    the deployed pipeline fills its history pool.
    """
    bank = bank or est.TableBank()
    spec = BetaBurstSpec(
        n_total=training.n_total, duration_ms=training.duration_ms, cycle_len_ms=gf.cycle_ms
    )
    arrivals = list(beta_arrivals(spec).per_cycle_counts) * training.passes
    gf_train = gf.with_w(training.w)
    table = bank.for_scheme(estimator, gf_train)
    estimates = []
    pending = 0
    for cycle, new in enumerate(arrivals):
        n_active = pending + new
        result = simulate_cycle(gf_train, n_active, philox_stream(seed, cycle))
        report = est.estimate(estimator, result.observation, gf_train, table)
        estimates.append(float(report.n_hat))
        pending = sum(1 for o in result.outcomes if not o.succeeded)
    return np.asarray(estimates)


def fit_frozen_model(cfg: ScenarioConfig, bank: Optional[est.TableBank] = None) -> pred.ArimaSpec:
    """Train-once coefficients reused for every forecast in the scenario."""
    series = make_training_series(
        cfg.seed + cfg.prediction.training.seed_offset,
        cfg.prediction.training,
        cfg.gf,
        cfg.estimator if cfg.gf.occupation == ADJACENT else est.ISCE,
        bank,
    )
    p, d, q = cfg.prediction.order
    try:
        return pred.fit_arma(pred.difference(series, d), p, q, d=d)
    except pred.FitConvergenceError as err:
        return err.best


class _Predictor:
    """Per-class forecaster with short-history fallback and optional refits."""

    def __init__(
        self,
        kind: str,
        spec: Optional[pred.ArimaSpec],
        window: int,
        refit_every: int = 0,
    ):
        self.kind = kind
        self.spec = spec
        self.window = window
        self.refit_every = refit_every
        self.pool = pred.HistoryPool()
        self._since_refit = 0

    def observe(self, value: float) -> None:
        self.pool.append(value)

    def _maybe_refit(self) -> None:
        if not self.refit_every:
            return
        p, d, q = self.spec.p, self.spec.d, self.spec.q
        if len(self.pool) < d + max(p, q) + 5:
            return
        self._since_refit += 1
        if self._since_refit < self.refit_every:
            return
        self._since_refit = 0
        try:
            self.spec = pred.fit_arma(pred.difference(self.pool.series, d), p, q, d=d)
        except pred.FitConvergenceError as err:
            self.spec = err.best

    def predict_next(self) -> float:
        if len(self.pool) == 0:
            return 0.0
        if self.kind == PREDICTOR_ARIMA:
            self._maybe_refit()
            need = self.spec.d + max(self.spec.p, self.spec.q, 1)
            if len(self.pool) < need:
                return self.pool.values[-1]
            return pred.forecast_one(self.spec, self.pool).value
        if len(self.pool) < self.window:
            return self.pool.values[-1]
        return pred.masw(self.pool, self.window).value


def _scheme_split(
    cfg: ScenarioConfig, pred_a: float, pred_b: float
) -> tuple[int, int, str, Optional[alloc.AllocationDecision]]:
    """RB split (w1, w2) for the next cycle under the configured scheme."""
    w_all, gf, floor = cfg.w_all, cfg.gf, cfg.floor_rbs
    contract_a, contract_b = cfg.contracts
    n_a = round_half_up(pred_a) if pred_a > 0 else 0
    n_b = round_half_up(pred_b) if pred_b > 0 else 0

    if cfg.scheme == SCHEME_ADAPTIVE:
        decision = alloc.allocate(
            pred_a, pred_b, cfg.contracts, w_all, gf, floor_rbs=floor
        )
        return decision.w1, decision.w2, decision.condition, decision

    if cfg.scheme == SCHEME_FAP:
        if n_a + n_b == 0:
            w1 = w_all // 2
        else:
            w1 = round_half_up(w_all * n_a / (n_a + n_b))
        w1 = min(max(w1, floor), w_all - 1)
        return w1, w_all - w1, cfg.scheme, None

    target = (
        contract_b.reliability_min
        if cfg.scheme == SCHEME_FIP_MIN
        else (contract_b.reliability_ideal or contract_b.reliability_min)
    )
    w2 = alloc.required_rbs(target, n_b, gf.k, gf.t_slots, gf.occupation).w
    w2 = min(w2, w_all - floor)
    return w_all - w2, w2, cfg.scheme, None


def _arrival_traces(cfg: ScenarioConfig) -> dict[str, list[int]]:
    """Bursty and uniform arrival counts padded/placed over the horizon."""
    counts_a = [0] * cfg.n_cycles
    if isinstance(cfg.traffic_a, BetaBurstSpec):
        burst = beta_arrivals(cfg.traffic_a)
        start = cfg.burst_start_cycle
        for i in range(len(burst)):
            if start + i < cfg.n_cycles:
                counts_a[start + i] = burst[i]
    else:
        counts_a = list(uniform_arrivals(cfg.traffic_a, cfg.n_cycles).per_cycle_counts)
    counts_b = list(uniform_arrivals(cfg.traffic_b, cfg.n_cycles).per_cycle_counts)
    return {EVENT_BURSTY: counts_a, EVENT_UNIFORM: counts_b}


def _run_trial(
    cfg: ScenarioConfig,
    trial: int,
    trial_seed: int,
    arima_spec: Optional[pred.ArimaSpec],
    bank: est.TableBank,
    arrivals: dict[str, list[int]],
) -> tuple[list[dict], dict[str, list[float]], dict[str, list[dict]]]:
    events = (EVENT_BURSTY, EVENT_UNIFORM)
    predictors = {
        e: _Predictor(
            cfg.predictor, arima_spec, cfg.prediction.masw_window, cfg.prediction.refit_every
        )
        for e in events
    }
    pending: dict[str, list[int]] = {e: [] for e in events}  # arrival cycles
    delays: dict[str, list[float]] = {e: [] for e in events}
    pred_next = {e: 0.0 for e in events}
    records: list[dict] = []
    pred_records: dict[str, list[dict]] = {e: [] for e in events}

    max_attempts = int(math.ceil(cfg.delay_truncation_ms / cfg.gf.cycle_ms)) + 1
    half = cfg.w_all // 2
    split = {EVENT_BURSTY: half, EVENT_UNIFORM: cfg.w_all - half}
    condition = "warmup"
    max_cycles = cfg.n_cycles + max_attempts + 1

    for cycle in range(max_cycles):
        if cycle >= cfg.n_cycles and not any(pending.values()):
            break
        for idx, event in enumerate(events):
            new = arrivals[event][cycle] if cycle < cfg.n_cycles else 0
            roster = list(pending[event]) + [cycle] * new
            n_active = len(roster)
            w_event = split[event]
            estimate = 0
            still_pending: list[int] = []
            if w_event >= 1:
                gf_event = cfg.gf.with_w(w_event)
                result = simulate_cycle(
                    gf_event, n_active, philox_stream(trial_seed, cycle, idx)
                )
                table = bank.for_scheme(cfg.estimator, gf_event)
                estimate = est.estimate(
                    cfg.estimator, result.observation, gf_event, table
                ).n_hat
                for arr, outcome in zip(roster, result.outcomes):
                    if outcome.succeeded:
                        delays[event].append(
                            (cycle - arr) * cfg.gf.cycle_ms
                            + outcome.first_success_slot * cfg.gf.slot_ms
                        )
                    elif cycle - arr + 1 >= max_attempts:
                        delays[event].append(math.inf)
                    else:
                        still_pending.append(arr)
            else:
                for arr in roster:
                    if cycle - arr + 1 >= max_attempts:
                        delays[event].append(math.inf)
                    else:
                        still_pending.append(arr)
            pending[event] = still_pending

            if cycle >= 1 and cycle < cfg.n_cycles:
                pred_records[event].append(
                    {
                        "cycle": cycle,
                        "true": n_active,
                        "predicted": pred_next[event],
                        "scored": cycle >= cfg.warmup_cycles,
                    }
                )
            records.append(
                {
                    "trial": trial,
                    "cycle": cycle,
                    "event": event,
                    "true_load": n_active,
                    "estimate": estimate,
                    "prediction": pred_next[event],
                    "w_alloc": w_event,
                    "condition": condition,
                }
            )
            predictors[event].observe(float(estimate))

        for event in events:
            pred_next[event] = predictors[event].predict_next()
        w1, w2, condition, _ = _scheme_split(
            cfg, pred_next[EVENT_BURSTY], pred_next[EVENT_UNIFORM]
        )
        split = {EVENT_BURSTY: w1, EVENT_UNIFORM: w2}

    return records, delays, pred_records


def run_scenario(cfg: ScenarioConfig, bank: Optional[est.TableBank] = None) -> RunReport:
    """Run the integrated three-tier loop over all trials and aggregate."""
    bank = bank or est.TableBank(cfg.cache_dir)
    arima_spec = fit_frozen_model(cfg, bank) if cfg.predictor == PREDICTOR_ARIMA else None
    arrivals = _arrival_traces(cfg)

    all_records: list[dict] = []
    all_delays: dict[str, list[float]] = {EVENT_BURSTY: [], EVENT_UNIFORM: []}
    pred_errors: dict[str, list[float]] = {EVENT_BURSTY: [], EVENT_UNIFORM: []}
    est_errors: dict[str, list[float]] = {EVENT_BURSTY: [], EVENT_UNIFORM: []}

    for trial, trial_seed in enumerate(cfg.trial_seeds):
        records, delays, pred_records = _run_trial(
            cfg, trial, trial_seed, arima_spec, bank, arrivals
        )
        all_records.extend(records)
        for event in all_delays:
            all_delays[event].extend(delays[event])
            for rec in pred_records[event]:
                if rec["scored"]:
                    pred_errors[event].append(
                        abs(rec["predicted"] - rec["true"]) / max(rec["true"], 1)
                    )
        for rec in records:
            est_errors[rec["event"]].append(abs(rec["estimate"] - rec["true_load"]))

    step = cfg.gf.slot_ms
    ccdfs = {
        event: CcdfCurve.from_delays(d, cfg.delay_truncation_ms, step)
        for event, d in all_delays.items()
    }
    summary = {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "name": cfg.name,
        "scheme": cfg.scheme,
        "estimator": cfg.estimator,
        "predictor": cfg.predictor,
        "trials": len(cfg.trial_seeds),
        "n_users": {e: ccdfs[e].n_users for e in ccdfs},
        "reliability_1ms": {e: ccdfs[e].reliability_at(1.0) for e in ccdfs},
        "reliability_1375us": {e: ccdfs[e].reliability_at(1.375) for e in ccdfs},
        "estimator_mae": {
            e: float(np.mean(v)) if v else 0.0 for e, v in est_errors.items()
        },
        "prediction_mean_rel_error": {
            e: float(np.mean(v)) if v else 0.0 for e, v in pred_errors.items()
        },
    }
    return RunReport(cfg.name, all_records, ccdfs, summary)


# ---------------------------------------------------------------------------
# Benchmarks
# ---------------------------------------------------------------------------


def batch_observations(cfg: GfConfig, n_active: int, trials: int, seed: int) -> np.ndarray:
    """Per-slot (a, b, c) counts for `trials` independent cycles, vectorised."""
    t, w, k = cfg.t_slots, cfg.w, cfg.k
    if n_active == 0:
        out = np.zeros((trials, t, 3), dtype=np.int64)
        out[:, :, 2] = w
        return out
    gen = philox_stream(seed)
    if cfg.occupation == ADJACENT:
        m = cfg.n_start_slots
        if m == 1:
            starts = np.zeros((trials, n_active), dtype=np.int64)
        else:
            starts = gen.integers(0, m, size=(trials, n_active))
        slot_idx = starts[..., None] + np.arange(k)
    elif k == t:
        slot_idx = np.broadcast_to(np.arange(t), (trials, n_active, t))
    else:
        u = gen.random((trials, n_active, t), dtype=np.float32)
        slot_idx = np.argpartition(u, k, axis=2)[..., :k]
    rbs = gen.integers(0, w, size=(trials, n_active, k))
    base = (np.arange(trials, dtype=np.int64) * t)[:, None, None]
    keys = ((base + slot_idx) * w + rbs).ravel()
    occupancy = np.bincount(keys, minlength=trials * t * w).reshape(trials, t, w)
    return np.stack(
        [
            (occupancy == 1).sum(axis=2),
            (occupancy >= 2).sum(axis=2),
            (occupancy == 0).sum(axis=2),
        ],
        axis=2,
    )


@dataclass
class EstimationBenchResult:
    w: int
    t_slots: int
    k: int
    n_values: list[int]
    estimates: dict[str, dict[int, np.ndarray]]  # scheme -> n -> per-trial estimates
    rows: list[dict]


def run_estimation_bench(
    n_range: Sequence[int] = range(8, 19),
    trials: int = 10_000,
    w: int = 20,
    t_slots: int = 8,
    k: int = 8,
    seed: int = 0,
    schemes: Sequence[str] = est.SCHEMES,
    bank: Optional[est.TableBank] = None,
) -> EstimationBenchResult:
    """Mean estimate and MAE per scheme over Monte Carlo cycles at each true N."""
    bank = bank or est.TableBank()
    cfg_adj = GfConfig(w=w, t_slots=t_slots, k=k, occupation=ADJACENT)
    cfg_arb = GfConfig(w=w, t_slots=t_slots, k=k, occupation=ARBITRARY)
    adjacent_schemes = [s for s in schemes if s in (est.SS_ML_LS, est.MS_MLI, est.MSEM)]
    arbitrary_schemes = [s for s in schemes if s in (est.MS_MLD, est.ISCE)]
    tables = {s: bank.for_scheme(s, cfg_adj if s in adjacent_schemes else cfg_arb) for s in schemes}

    estimates: dict[str, dict[int, np.ndarray]] = {s: {} for s in schemes}
    for n in n_range:
        counts_adj = batch_observations(cfg_adj, n, trials, seed + 1000 + n)
        counts_arb = batch_observations(cfg_arb, n, trials, seed + 2000 + n)
        for scheme in schemes:
            cfg_s = cfg_adj if scheme in adjacent_schemes else cfg_arb
            counts = counts_adj if scheme in adjacent_schemes else counts_arb
            vals = np.empty(trials, dtype=np.int64)
            for i in range(trials):
                obs = CycleObservation.from_array(counts[i], w)
                vals[i] = est.estimate(scheme, obs, cfg_s, tables[scheme]).n_hat
            estimates[scheme][n] = vals

    rows = []
    for n in n_range:
        for scheme in schemes:
            vals = estimates[scheme][n]
            rows.append(
                {
                    "n_true": int(n),
                    "scheme": scheme,
                    "mean_estimate": float(vals.mean()),
                    "mae": float(np.abs(vals - n).mean()),
                    "bias": float(vals.mean() - n),
                    "trials": int(trials),
                }
            )
    return EstimationBenchResult(w, t_slots, k, list(n_range), estimates, rows)


def run_failprob_bench(
    n_active: int = 10,
    t_slots: int = 8,
    w_range: Sequence[int] = range(7, 34),
    k_set: Sequence[int] = (2, 4, 8),
    trials: int = 1_000_000,
    seed: int = 0,
    occupations: Sequence[str] = (ADJACENT, ARBITRARY),
) -> list[dict]:
    """Analytical vs Monte Carlo failure probability over the (W, K) grid."""
    from .gfsim import mc_failure_rate

    rows = []
    for occupation in occupations:
        for k in k_set:
            for w in w_range:
                cfg = GfConfig(w=w, t_slots=t_slots, k=k, occupation=occupation)
                if occupation == ADJACENT:
                    analytical = alloc.fail_prob_adjacent(w, n_active, k, t_slots)
                else:
                    analytical = alloc.fail_prob_arbitrary(w, n_active, k, t_slots)
                empirical = mc_failure_rate(
                    cfg, n_active, trials, seed=seed + 7919 * k + w
                )
                rows.append(
                    {
                        "occupation": occupation,
                        "k": int(k),
                        "w": int(w),
                        "analytical": analytical,
                        "empirical": empirical,
                        "abs_error": abs(analytical - empirical),
                    }
                )
    return rows


@dataclass
class PredictionBenchResult:
    arima_errors: np.ndarray  # per replication mean relative error
    masw_errors: np.ndarray
    rows: list[dict]

    @property
    def arima_mre(self) -> float:
        return float(self.arima_errors.mean())

    @property
    def masw_mre(self) -> float:
        return float(self.masw_errors.mean())


def run_prediction_bench(
    replications: int = 50,
    seed: int = 0,
    uniform_users: int = 10,
    burst: Optional[BetaBurstSpec] = None,
    burst_start_ms: float = 10.0,
    n_cycles: int = 32,
    w: int = 32,
    t_slots: int = 8,
    k: int = 8,
    estimator: str = est.SS_ML_LS,
    masw_window: int = 5,
    order: tuple[int, int, int] = (0, 2, 3),
    warmup: int = 5,
    refit_every: int = 1,
    training: TrainingSpec = TrainingSpec(),
    bank: Optional[est.TableBank] = None,
) -> PredictionBenchResult:
    """Single-step forecasts of a uniform-plus-burst load, both predictors.

    The history pool holds per-cycle estimates; forecasts are scored against
    the true next-cycle active count with relative error floored at 1 user.
    With `refit_every` > 0 the coefficients are re-estimated on the live
    pool every that many cycles (once it is long enough); the offline
    training fit covers the cycles before that point.
    """
    bank = bank or est.TableBank()
    warmup = max(warmup, masw_window)
    gf = GfConfig(w=w, t_slots=t_slots, k=k, occupation=ADJACENT)
    burst = burst or BetaBurstSpec(n_total=80, duration_ms=15.0, cycle_len_ms=gf.cycle_ms)
    burst_counts = beta_arrivals(burst)
    start = int(round(burst_start_ms / gf.cycle_ms))
    arrivals = [uniform_users] * n_cycles
    for i in range(len(burst_counts)):
        if start + i < n_cycles:
            arrivals[start + i] += burst_counts[i]

    p, d, q = order
    training_series = make_training_series(seed + training.seed_offset, training, gf, estimator, bank)
    try:
        base_spec = pred.fit_arma(pred.difference(training_series, d), p, q, d=d)
    except pred.FitConvergenceError as err:
        base_spec = err.best
    min_fit_len = d + max(p, q) + 5

    table = bank.for_scheme(estimator, gf)
    arima_errors, masw_errors = [], []
    rows = []
    for rep in range(replications):
        pool = pred.HistoryPool()
        pending = 0
        arima_spec = base_spec
        truth: list[int] = []
        preds_arima: list[float] = []
        preds_masw: list[float] = []
        for cycle in range(n_cycles):
            n_active = pending + arrivals[cycle]
            truth.append(n_active)
            if cycle >= warmup:
                if (
                    refit_every
                    and len(pool) >= min_fit_len
                    and (cycle - warmup) % refit_every == 0
                ):
                    try:
                        arima_spec = pred.fit_arma(
                            pred.difference(pool.series, d), p, q, d=d
                        )
                    except pred.FitConvergenceError as err:
                        arima_spec = err.best
                preds_arima.append(pred.forecast_one(arima_spec, pool).value)
                preds_masw.append(pred.masw(pool, masw_window).value)
            result = simulate_cycle(gf, n_active, philox_stream(seed, rep, cycle))
            report = est.estimate(estimator, result.observation, gf, table)
            pool.append(float(report.n_hat))
            pending = sum(1 for o in result.outcomes if not o.succeeded)
        t_arr = np.asarray(truth[warmup:], dtype=float)
        e_arima = np.abs(np.asarray(preds_arima) - t_arr) / np.maximum(t_arr, 1.0)
        e_masw = np.abs(np.asarray(preds_masw) - t_arr) / np.maximum(t_arr, 1.0)
        arima_errors.append(float(e_arima.mean()))
        masw_errors.append(float(e_masw.mean()))
        for i, cycle in enumerate(range(warmup, n_cycles)):
            rows.append(
                {
                    "replication": rep,
                    "cycle": cycle,
                    "true": float(t_arr[i]),
                    "pred_arima": float(preds_arima[i]),
                    "pred_masw": float(preds_masw[i]),
                }
            )
    return PredictionBenchResult(np.asarray(arima_errors), np.asarray(masw_errors), rows)


# ---------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------


def _write_csv(path: Path, fieldnames: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k)) for k in fieldnames})


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


def emit(report: RunReport, fmt: str, out_dir: str | Path) -> list[Path]:
    """Write a run report as CSV files plus a JSON summary (or JSON only).

    Row order is deterministic, floats use shortest round-trip formatting,
    and reruns with identical inputs produce byte-identical files.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        if fmt == "csv":
            if report.records:
                rec_path = out / f"records_{report.name}.csv"
                _write_csv(rec_path, list(report.records[0].keys()), report.records)
                paths.append(rec_path)
            for event, curve in sorted(report.ccdfs.items()):
                curve_path = out / f"ccdf_{event}_{report.name}.csv"
                rows = [
                    {"delay_ms": float(d), "ccdf": float(c)}
                    for d, c in zip(curve.delay_ms, curve.ccdf)
                ]
                _write_csv(curve_path, ["delay_ms", "ccdf"], rows)
                paths.append(curve_path)
            summary_path = out / f"summary_{report.name}.json"
            summary_path.write_text(json.dumps(report.summary, sort_keys=True, indent=2) + "\n")
            paths.append(summary_path)
        elif fmt == "json":
            blob = {
                "summary": report.summary,
                "records": report.records,
                "ccdfs": {
                    e: {"delay_ms": c.delay_ms.tolist(), "ccdf": c.ccdf.tolist()}
                    for e, c in sorted(report.ccdfs.items())
                },
            }
            path = out / f"report_{report.name}.json"
            path.write_text(json.dumps(blob, sort_keys=True, indent=2) + "\n")
            paths.append(path)
        else:
            raise ValueError(f"unknown output format {fmt!r}")
        return paths
    except OSError as err:
        raise OSError(f"cannot write report under {out}: {err}") from err


def parse_summary(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
