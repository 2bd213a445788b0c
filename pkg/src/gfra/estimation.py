"""Network-load estimation from per-slot RB state observations.

The base station only sees, per slot, how many RBs carried a success, a
collision, or nothing.  Treating each user's RB choice as one step of a
Markov chain over (success, collision, idle) counts lets us score any
hypothesised user count N by the N-step probability of reaching the
observed state, and pick the most likely one.

Two chain variants are provided:

* single-slot: states (a, b, c) with a + b + c = w; one step is one user
  picking one RB in one slot.
* whole-cycle: states over all w * t_slots RB cells of a cycle; one step is
  one user touching k cells at once (arbitrary occupation).

On top of the chains sit the estimators: per-slot ML combined through a
least-squares recovery of the start vector (ss_ml_ls), joint multi-slot ML
over start vectors (ms_mli), direct whole-cycle ML (ms_mld), and the two
reference schemes msem (distance to mean state counts) and isce (idle-RB
counting).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from scipy import sparse
from scipy.special import gammaln

from ._util import round_half_up
from .gfsim import ADJACENT, ARBITRARY, CycleObservation, GfConfig, SlotObservation

SINGLE_SLOT = "single_slot"
WHOLE_CYCLE = "whole_cycle"

SS_ML_LS = "ss_ml_ls"
MS_MLI = "ms_mli"
MS_MLD = "ms_mld"
MSEM = "msem"
ISCE = "isce"
SCHEMES = (SS_ML_LS, MS_MLI, MS_MLD, MSEM, ISCE)

DEFAULT_ENUMERATION_CAP = 2_000_000
DEFAULT_MAX_TABLE_ENTRIES = 50_000_000

_CACHE_FORMAT_VERSION = 1


def _cache_name(variant: str, w: int, t_slots: int, k: int, n_max: int) -> str:
    if variant == SINGLE_SLOT:
        return f"sstab_w{w}_n{n_max}_v{_CACHE_FORMAT_VERSION}.npz"
    return f"wctab_w{w}_t{t_slots}_k{k}_n{n_max}_v{_CACHE_FORMAT_VERSION}.npz"


class EnumerationCapExceeded(RuntimeError):
    """Start-vector space too large to enumerate; fall back to ss_ml_ls."""


class InconsistentObservation(ValueError):
    """Observed state unreachable for every candidate user count."""


class TableCacheMismatch(RuntimeError):
    """Cached table file does not match the requested parameters."""


def default_n_max(w: int, t_slots: int = 1, k: int = 1) -> int:
    """Largest user count a table must support for the default search bounds.

    The ML search upper bound is max(3w, 2 * lower-bound); the lower bound
    a + 2b never exceeds 2w per slot, i.e. 2wt/k users over a cycle.
    """
    return max(3 * w, math.ceil(4 * w * t_slots / k))


@dataclass(frozen=True)
class MarkovModel:
    """State space and one-user transition kernel for either chain variant."""

    variant: str
    w: int
    t_slots: int
    k: int
    states: np.ndarray  # (S, 3) int array of (a, b, c)
    kernel: sparse.csr_matrix  # (S, S), rows sum to 1
    index: dict = field(repr=False)

    @property
    def n_cells(self) -> int:
        return self.w if self.variant == SINGLE_SLOT else self.w * self.t_slots

    @property
    def initial_state(self) -> tuple[int, int, int]:
        return (0, 0, self.n_cells)


class StepProbTable:
    """N-step reach probabilities from the all-idle state, N = 0..n_max."""

    def __init__(
        self,
        variant: str,
        w: int,
        t_slots: int,
        k: int,
        n_max: int,
        states: np.ndarray,
        probs: np.ndarray,
    ):
        self.variant = variant
        self.w = int(w)
        self.t_slots = int(t_slots)
        self.k = int(k)
        self.n_max = int(n_max)
        self.states = np.asarray(states, dtype=np.int64)
        self.probs = np.asarray(probs, dtype=np.float64)  # (n_max + 1, S)
        if self.probs.shape != (self.n_max + 1, self.states.shape[0]):
            raise ValueError("probs shape inconsistent with states/n_max")
        self.index = {tuple(s): i for i, s in enumerate(self.states.tolist())}

    @property
    def n_cells(self) -> int:
        return self.w if self.variant == SINGLE_SLOT else self.w * self.t_slots

    def state_id(self, state: tuple[int, int, int]) -> Optional[int]:
        return self.index.get(tuple(int(v) for v in state))

    def prob(self, n: int, state: tuple[int, int, int]) -> float:
        """Probability of observing `state` after n user steps."""
        if not (0 <= n <= self.n_max):
            raise ValueError(f"n={n} outside table range [0, {self.n_max}]")
        i = self.state_id(state)
        return 0.0 if i is None else float(self.probs[n, i])

    def dist(self, n: int) -> dict[tuple[int, int, int], float]:
        """Sparse distribution over states after n steps."""
        row = self.probs[n]
        nz = np.nonzero(row)[0]
        return {tuple(self.states[i]): float(row[i]) for i in nz}

    # -- disk cache -------------------------------------------------------

    def _meta(self) -> dict:
        return {
            "format_version": _CACHE_FORMAT_VERSION,
            "variant": self.variant,
            "w": self.w,
            "t_slots": self.t_slots,
            "k": self.k,
            "n_max": self.n_max,
        }

    def cache_name(self) -> str:
        return _cache_name(self.variant, self.w, self.t_slots, self.k, self.n_max)

    def save(self, directory: str | Path) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / self.cache_name()
        np.savez_compressed(
            path, meta=json.dumps(self._meta()), states=self.states, probs=self.probs
        )
        return path

    @classmethod
    def load(
        cls,
        path: str | Path,
        expect: Optional[dict] = None,
    ) -> "StepProbTable":
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            if meta.get("format_version") != _CACHE_FORMAT_VERSION:
                raise TableCacheMismatch(f"{path}: unsupported format {meta}")
            if expect is not None:
                for key, val in expect.items():
                    if meta.get(key) != val:
                        raise TableCacheMismatch(f"{path}: {key}={meta.get(key)} != {val}")
            return cls(
                meta["variant"], meta["w"], meta["t_slots"], meta["k"], meta["n_max"],
                data["states"], data["probs"],
            )


def _step_table(model: MarkovModel, n_max: int) -> StepProbTable:
    s0 = model.index[model.initial_state]
    v = np.zeros(model.states.shape[0])
    v[s0] = 1.0
    probs = np.empty((n_max + 1, v.shape[0]))
    probs[0] = v
    kernel_t = model.kernel.T.tocsr()
    for n in range(1, n_max + 1):
        v = kernel_t @ v
        probs[n] = v
    return StepProbTable(
        model.variant, model.w, model.t_slots, model.k, n_max, model.states, probs
    )


def build_single_slot_model(
    w: int,
    n_max: int,
    max_table_entries: int = DEFAULT_MAX_TABLE_ENTRIES,
) -> tuple[MarkovModel, StepProbTable]:
    """Chain over (a, b, c) with a + b + c = w; one step = one RB pick.

    A new user keeps the state with probability b/w (hits a collision RB),
    turns an idle RB into a success with probability c/w, and turns a
    success into a collision with probability a/w.
    """
    if w < 1:
        raise ValueError("w must be >= 1")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    states = [(a, b, w - a - b) for a in range(w + 1) for b in range(w + 1 - a)]
    if (n_max + 1) * len(states) > max_table_entries:
        raise MemoryError("state table would exceed the configured memory bound")
    index = {s: i for i, s in enumerate(states)}
    rows, cols, vals = [], [], []
    for i, (a, b, c) in enumerate(states):
        if b:
            rows.append(i), cols.append(i), vals.append(b / w)
        if c:
            rows.append(i), cols.append(index[(a + 1, b, c - 1)]), vals.append(c / w)
        if a:
            rows.append(i), cols.append(index[(a - 1, b + 1, c)]), vals.append(a / w)
    kernel = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(len(states), len(states)), dtype=np.float64
    )
    model = MarkovModel(SINGLE_SLOT, w, 1, 1, np.array(states, dtype=np.int64), kernel, index)
    return model, _step_table(model, n_max)


def build_whole_cycle_model(
    w: int,
    t_slots: int,
    k: int,
    n_max: int,
    max_table_entries: int = DEFAULT_MAX_TABLE_ENTRIES,
) -> tuple[MarkovModel, StepProbTable]:
    """Chain over all w * t_slots RB cells; one step = one user's k picks.

    A user's k cells are modelled as a uniform k-subset of the w * t_slots
    cells: x picks land on success cells (turning them into collisions),
    y on idle cells (new successes), z = k - x - y on collision cells,
    with hypergeometric probability C(a,x) C(c,y) C(b,z) / C(wt,k).
    """
    if not (1 <= k <= t_slots):
        raise ValueError("need 1 <= k <= t_slots")
    if w < 1:
        raise ValueError("w must be >= 1")
    m = w * t_slots
    states = [(a, b, m - a - b) for a in range(m + 1) for b in range(m + 1 - a)]
    if (n_max + 1) * len(states) > max_table_entries:
        raise MemoryError("state table would exceed the configured memory bound")
    index = {s: i for i, s in enumerate(states)}
    denom = math.comb(m, k)
    rows, cols, vals = [], [], []
    for i, (a, b, c) in enumerate(states):
        for x in range(min(k, a) + 1):
            for y in range(min(k - x, c) + 1):
                z = k - x - y
                if z > b:
                    continue
                dst = (a - x + y, b + x, c - y)
                rows.append(i)
                cols.append(index[dst])
                vals.append(math.comb(a, x) * math.comb(c, y) * math.comb(b, z) / denom)
    kernel = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(len(states), len(states)), dtype=np.float64
    )
    model = MarkovModel(WHOLE_CYCLE, w, t_slots, k, np.array(states, dtype=np.int64), kernel, index)
    return model, _step_table(model, n_max)


# ---------------------------------------------------------------------------
# Start vectors (compositions of N over the admissible start slots)
# ---------------------------------------------------------------------------


def composition_count(n: int, slots: int) -> int:
    return math.comb(n + slots - 1, slots - 1)


def enumerate_start_vectors(
    n: int, slots: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[tuple[int, ...]]:
    """Yield every way to split n users over `slots` start slots, once each."""
    if n < 0 or slots < 1:
        raise ValueError("need n >= 0 and slots >= 1")
    if composition_count(n, slots) > cap:
        raise EnumerationCapExceeded(
            f"{composition_count(n, slots)} start vectors exceed cap {cap}"
        )

    def rec(remaining: int, left: int) -> Iterator[tuple[int, ...]]:
        if left == 1:
            yield (remaining,)
            return
        for head in range(remaining + 1):
            for tail in rec(remaining - head, left - 1):
                yield (head,) + tail

    return rec(n, slots)


def compositions_array(n: int, slots: int, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """All compositions as an (count, slots) int array, enumeration order."""
    return np.array(list(enumerate_start_vectors(n, slots, cap)), dtype=np.int64).reshape(
        -1, slots
    )


def start_vector_pmf(phi, n: int) -> float:
    """Probability of start vector `phi` when n users pick start slots i.i.d.

    Equals the multinomial count of orderings divided by slots^n.
    """
    phi = [int(v) for v in phi]
    if any(v < 0 for v in phi):
        raise ValueError("start vector entries must be >= 0")
    if sum(phi) != n:
        raise ValueError(f"start vector sums to {sum(phi)}, expected {n}")
    slots = len(phi)
    remaining = n
    ways = 1
    for v in phi:
        ways *= math.comb(remaining, v)
        remaining -= v
    return ways / slots**n


def _log_pmf_rows(phis: np.ndarray, n: int) -> np.ndarray:
    """log start_vector_pmf for every row of `phis` (vectorised)."""
    slots = phis.shape[1]
    return (
        gammaln(n + 1)
        - gammaln(phis + 1.0).sum(axis=1)
        - n * math.log(slots)
    )


@lru_cache(maxsize=256)
def design_matrix(t_slots: int, k: int) -> np.ndarray:
    """0/1 matrix mapping start-slot counts to per-slot active counts.

    Entry (t, r) is 1 when a user starting its k replicas in slot r+1 is
    active in slot t+1, i.e. rows are sliding windows of width k clipped at
    the cycle edges.
    """
    if not (1 <= k <= t_slots):
        raise ValueError("need 1 <= k <= t_slots")
    m = t_slots - k + 1
    omega = np.zeros((t_slots, m))
    for t in range(1, t_slots + 1):
        lo = max(1, t - k + 1)
        hi = min(t, m)
        omega[t - 1, lo - 1 : hi] = 1.0
    omega.setflags(write=False)
    return omega


# ---------------------------------------------------------------------------
# Estimate report and the estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimateReport:
    n_hat: int
    scheme: str
    per_slot: Optional[np.ndarray] = None
    log_likelihood: Optional[float] = None

    def __post_init__(self) -> None:
        if self.n_hat < 0:
            raise ValueError("n_hat must be >= 0")


def _scan_bounds(lower: int, w: int, n_max: Optional[int], table_n_max: int) -> tuple[int, int]:
    hi = max(3 * w, 2 * lower) if n_max is None else n_max
    hi = min(hi, table_n_max)
    if lower > hi:
        raise InconsistentObservation(
            f"lower bound {lower} exceeds search ceiling {hi}; rebuild the table larger"
        )
    return lower, hi


def ml_slot_count(
    obs: SlotObservation, table: StepProbTable, n_max: Optional[int] = None
) -> int:
    """Most likely user count for one slot, given its (a, b, c) observation.

    Scans N from a + 2b (the fewest users that could produce the
    observation) upward and returns the first maximiser of the N-step reach
    probability.
    """
    if table.variant != SINGLE_SLOT:
        raise ValueError("ml_slot_count needs a single-slot table")
    if obs.a + obs.b + obs.c != table.w:
        raise ValueError(f"observation {obs} inconsistent with w={table.w}")
    lo, hi = _scan_bounds(obs.a + 2 * obs.b, table.w, n_max, table.n_max)
    i = table.state_id(obs)
    if i is None:
        raise InconsistentObservation(f"state {obs} outside the table state space")
    col = table.probs[lo : hi + 1, i]
    if not col.any():
        raise InconsistentObservation(f"state {obs} unreachable for N in [{lo}, {hi}]")
    return lo + int(np.argmax(col))


def ss_ml_ls(
    obs: CycleObservation,
    cfg: GfConfig,
    table: StepProbTable,
    n_max: Optional[int] = None,
) -> EstimateReport:
    """Per-slot ML counts, then least-squares recovery of the start vector.

    The per-slot counts n_t are linear in the start vector (each user is
    active in a k-wide window of slots), so the normal equations recover
    the start counts; negatives are clamped to zero before summing.
    """
    if cfg.occupation != ADJACENT:
        raise ValueError("ss_ml_ls applies to adjacent occupation only")
    n_slot = np.array([ml_slot_count(s, table, n_max) for s in obs.slots], dtype=float)
    omega = design_matrix(cfg.t_slots, cfg.k)
    gram = omega.T @ omega
    phi = np.linalg.solve(gram, omega.T @ n_slot)
    phi = np.clip(phi, 0.0, None)
    return EstimateReport(round_half_up(float(phi.sum())), SS_ML_LS, per_slot=n_slot)


def ms_mli(
    obs: CycleObservation,
    cfg: GfConfig,
    table: StepProbTable,
    n_max: Optional[int] = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> EstimateReport:
    """Joint ML over the whole cycle, marginalising the start vector.

    For each hypothesis N, sums over every start vector the product of
    per-slot reach probabilities at the implied slot loads, weighted by the
    start vector's probability.
    """
    if cfg.occupation != ADJACENT:
        raise ValueError("ms_mli applies to adjacent occupation only")
    if table.variant != SINGLE_SLOT:
        raise ValueError("ms_mli needs a single-slot table")
    slots = cfg.n_start_slots
    totals = obs.totals()
    lower = math.ceil((totals.a + 2 * totals.b) / cfg.k)
    lo, hi = _scan_bounds(lower, table.w, n_max, table.n_max)

    state_ids = []
    for s in obs.slots:
        i = table.state_id(s)
        if i is None:
            raise InconsistentObservation(f"state {s} outside the table state space")
        state_ids.append(i)
    slot_probs = table.probs[:, state_ids]  # (n_max + 1, T)

    omega_t = design_matrix(cfg.t_slots, cfg.k).T
    best_n, best_lik = lo, -1.0
    for n in range(lo, hi + 1):
        if composition_count(n, slots) > cap:
            raise EnumerationCapExceeded(
                f"N={n} needs {composition_count(n, slots)} start vectors "
                f"(cap {cap}); use ss_ml_ls instead"
            )
        phis = compositions_array(n, slots, cap)
        loads = (phis @ omega_t).astype(np.int64)  # (n_phi, T)
        factors = slot_probs[loads, np.arange(len(state_ids))]
        joint = factors.prod(axis=1)
        lik = float(np.exp(_log_pmf_rows(phis, n)) @ joint)
        if lik > best_lik:
            best_n, best_lik = n, lik
    if best_lik <= 0.0:
        raise InconsistentObservation("observation unreachable for every candidate N")
    log_lik = math.log(best_lik)
    return EstimateReport(best_n, MS_MLI, log_likelihood=log_lik)


def ms_mld(
    obs: CycleObservation,
    cfg: GfConfig,
    table: StepProbTable,
    n_max: Optional[int] = None,
) -> EstimateReport:
    """Whole-cycle ML on the aggregated (a, b, c) totals, one step per user."""
    if cfg.occupation != ARBITRARY:
        raise ValueError("ms_mld applies to arbitrary occupation only")
    if table.variant != WHOLE_CYCLE:
        raise ValueError("ms_mld needs a whole-cycle table")
    if (table.w, table.t_slots, table.k) != (cfg.w, cfg.t_slots, cfg.k):
        raise ValueError("table parameters do not match the access config")
    totals = obs.totals()
    lower = math.ceil((totals.a + 2 * totals.b) / cfg.k)
    if totals.b > 0:
        lower = max(lower, 2)
    lo, hi = _scan_bounds(lower, table.w, n_max, table.n_max)
    i = table.state_id(totals)
    if i is None:
        raise InconsistentObservation(f"totals {totals} outside the table state space")
    col = table.probs[lo : hi + 1, i]
    if not col.any():
        raise InconsistentObservation(f"totals {totals} unreachable for N in [{lo}, {hi}]")
    offset = int(np.argmax(col))
    return EstimateReport(lo + offset, MS_MLD, log_likelihood=math.log(float(col[offset])))


def _msem_windows(t_slots: int, k: int) -> list[tuple[int, int]]:
    """(start slot r, width e) windows combined by the msem estimator."""
    head = [(1, e) for e in range(1, k)]
    body = [(r, k) for r in range(1, t_slots - k + 2)]
    tail = [(r, t_slots - r + 1) for r in range(t_slots - k + 2, t_slots + 1)]
    return head + body + tail


def _msem_window_estimate(a: int, b: int, c: int, cells: int, hi: int) -> int:
    """User count minimising squared distance to the mean state counts.

    For n users dropping one pick each into `cells` RBs, the expected
    success count is n (1 - 1/cells)^(n-1) and the expected idle count is
    cells (1 - 1/cells)^n.
    """
    lo = a + 2 * b
    ns = np.arange(lo, max(hi, lo) + 1, dtype=float)
    if cells == 1:
        mean_a = np.where(ns == 1, 1.0, 0.0)
        mean_c = np.where(ns == 0, 1.0, 0.0)
    else:
        keep = 1.0 - 1.0 / cells
        mean_a = ns * keep ** np.maximum(ns - 1, 0)
        mean_c = cells * keep**ns
        mean_a[ns == 0] = 0.0
    mean_b = cells - mean_a - mean_c
    dist = (a - mean_a) ** 2 + (b - mean_b) ** 2 + (c - mean_c) ** 2
    return int(ns[int(np.argmin(dist))])


def msem(
    obs: CycleObservation, cfg: GfConfig, n_max: Optional[int] = None
) -> EstimateReport:
    """Window-wise distance-to-mean estimates, combined over sliding windows.

    Every window of e consecutive slots is treated as e*w RBs receiving one
    pick per active user-slot; window estimates are averaged with weight
    1/k^2 so each user's k replicas are counted once overall.
    """
    if cfg.occupation != ADJACENT:
        raise ValueError("msem applies to adjacent occupation only")
    per_slot = np.array([[s.a, s.b, s.c] for s in obs.slots], dtype=np.int64)
    total = 0.0
    for r, e in _msem_windows(cfg.t_slots, cfg.k):
        win = per_slot[r - 1 : r - 1 + e].sum(axis=0)
        a, b, c = (int(v) for v in win)
        hi = n_max if n_max is not None else max(3 * e * cfg.w, 2 * (a + 2 * b))
        total += _msem_window_estimate(a, b, c, e * cfg.w, hi)
    return EstimateReport(round_half_up(total / cfg.k**2), MSEM)


def isce(
    obs: CycleObservation, cfg: GfConfig, n_max: Optional[int] = None
) -> EstimateReport:
    """Idle-RB counting: invert the idle fraction per slot, average over k.

    The chance an RB stays idle under n independent picks is
    ((w-1)/w)^n, so n_t = log(c_t/w) / log((w-1)/w).  A slot with no idle
    RBs is saturated and pinned at the search ceiling.
    """
    if cfg.w < 2:
        raise ValueError("isce needs w >= 2 (idle fraction is degenerate at w = 1)")
    sat = n_max if n_max is not None else 3 * cfg.w
    log_keep = math.log((cfg.w - 1) / cfg.w)
    per_slot = np.empty(len(obs.slots))
    for t, s in enumerate(obs.slots):
        if s.c == cfg.w:
            per_slot[t] = 0.0
        elif s.c == 0:
            per_slot[t] = sat
        else:
            per_slot[t] = math.log(s.c / cfg.w) / log_keep
    return EstimateReport(
        round_half_up(float(per_slot.sum()) / cfg.k), ISCE, per_slot=per_slot
    )


def estimate(
    scheme: str,
    obs: CycleObservation,
    cfg: GfConfig,
    table: Optional[StepProbTable] = None,
    n_max: Optional[int] = None,
) -> EstimateReport:
    """Dispatch to one of the five estimation schemes by name."""
    if scheme == SS_ML_LS:
        return ss_ml_ls(obs, cfg, table, n_max)
    if scheme == MS_MLI:
        return ms_mli(obs, cfg, table, n_max)
    if scheme == MS_MLD:
        return ms_mld(obs, cfg, table, n_max)
    if scheme == MSEM:
        return msem(obs, cfg, n_max)
    if scheme == ISCE:
        return isce(obs, cfg, n_max)
    raise ValueError(f"unknown estimation scheme {scheme!r}")


class TableBank:
    """Build-once store of step tables, optionally mirrored to a cache dir."""

    def __init__(self, cache_dir: Optional[str | Path] = None):
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self._mem: dict[tuple, StepProbTable] = {}

    def _get(self, key: tuple, build) -> StepProbTable:
        if key in self._mem:
            return self._mem[key]
        table = None
        if self.cache_dir is not None:
            variant, w, t, k, n_max = key
            path = self.cache_dir / _cache_name(variant, w, t, k, n_max)
            if path.exists():
                try:
                    table = StepProbTable.load(
                        path,
                        expect={"variant": variant, "w": w, "t_slots": t, "k": k, "n_max": n_max},
                    )
                except TableCacheMismatch:
                    table = None
        if table is None:
            table = build()
            if self.cache_dir is not None:
                table.save(self.cache_dir)
        self._mem[key] = table
        return table

    def single_slot(self, w: int, n_max: Optional[int] = None) -> StepProbTable:
        n_max = default_n_max(w) if n_max is None else n_max
        key = (SINGLE_SLOT, w, 1, 1, n_max)
        return self._get(key, lambda: build_single_slot_model(w, n_max)[1])

    def whole_cycle(
        self, w: int, t_slots: int, k: int, n_max: Optional[int] = None
    ) -> StepProbTable:
        n_max = default_n_max(w, t_slots, k) if n_max is None else n_max
        key = (WHOLE_CYCLE, w, t_slots, k, n_max)
        return self._get(key, lambda: build_whole_cycle_model(w, t_slots, k, n_max)[1])

    def for_scheme(self, scheme: str, cfg: GfConfig, n_max: Optional[int] = None):
        if scheme in (SS_ML_LS, MS_MLI):
            need = default_n_max(cfg.w, cfg.t_slots, cfg.k) if n_max is None else n_max
            return self.single_slot(cfg.w, need)
        if scheme == MS_MLD:
            return self.whole_cycle(cfg.w, cfg.t_slots, cfg.k, n_max)
        return None
