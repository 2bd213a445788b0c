"""Single-step network-load forecasting from the history of estimates.

Per-cycle estimates are appended to a history pool and treated as
observations.  Forecasting uses an integrated moving-average model fitted by
conditional sum of squares on the twice-differenced series, with a moving
average over a sliding window as the reference scheme.  AIC and the
Durbin-Watson statistic drive the offline order selection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize


class InsufficientHistory(ValueError):
    """The history pool is too short for the requested operation."""


class FitConvergenceError(RuntimeError):
    """Optimizer did not converge; carries the best parameters found."""

    def __init__(self, message: str, best: "ArimaSpec"):
        super().__init__(message)
        self.best = best


@dataclass
class HistoryPool:
    """Append-only record of per-cycle load values (estimates count as truth)."""

    values: list[float] = field(default_factory=list)

    def append(self, value: float) -> None:
        if value < 0:
            raise ValueError("load values must be >= 0")
        self.values.append(float(value))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def series(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class ArimaSpec:
    """Fitted forecasting model: orders, intercept, coefficients, variance.

    `ar_coeffs` weight past differenced observations and `ma_coeffs` weight
    past one-step residuals.  `degenerate` flags a perfect fit (zero residual
    variance), where likelihood-based diagnostics are undefined.
    """

    p: int
    d: int
    q: int
    c: float
    ar_coeffs: tuple[float, ...]
    ma_coeffs: tuple[float, ...]
    sigma2: float
    degenerate: bool = False

    def __post_init__(self) -> None:
        if self.d < 0:
            raise ValueError("difference order must be >= 0")
        if len(self.ar_coeffs) != self.p or len(self.ma_coeffs) != self.q:
            raise ValueError("coefficient lengths must match the orders")
        if not all(math.isfinite(v) for v in self.ma_coeffs + self.ar_coeffs):
            raise ValueError("coefficients must be finite")


@dataclass(frozen=True)
class Forecast:
    value: float
    value_rounded: int


@dataclass(frozen=True)
class DiagnosticReport:
    aic: float
    dw: float
    log_likelihood: float


def difference(series: Sequence[float], d: int) -> np.ndarray:
    """Apply the first-difference operator d times (length shrinks by d)."""
    arr = np.asarray(series, dtype=float)
    if d < 0:
        raise ValueError("d must be >= 0")
    if arr.size <= d:
        raise InsufficientHistory(f"need more than {d} points to difference {d} times")
    return np.diff(arr, n=d) if d else arr.copy()


def _css_residuals(y: np.ndarray, c: float, ar: np.ndarray, ma: np.ndarray) -> np.ndarray:
    """One-step residuals of the ARMA recursion, zeros before the sample."""
    p, q = len(ar), len(ma)
    n = y.size
    eps = np.zeros(n)
    for t in range(p, n):
        pred = c
        for i in range(p):
            pred += ar[i] * y[t - 1 - i]
        for j in range(q):
            if t - 1 - j >= p:
                pred += ma[j] * eps[t - 1 - j]
        eps[t] = y[t] - pred
    return eps[p:]


def _pacf_to_coeffs(r: np.ndarray) -> np.ndarray:
    """Map partial autocorrelations in (-1, 1) to a stationary AR polynomial.

    Levinson-Durbin style recursion; the resulting coefficients phi give a
    polynomial 1 - phi_1 z - ... - phi_k z^k with all roots outside the unit
    circle.  Used to keep the optimizer inside the stationary (AR) and
    invertible (MA) regions, so the deployed residual recursion cannot
    oscillate or diverge on long histories.
    """
    phi = np.zeros(0)
    for j, rj in enumerate(r):
        new = np.empty(j + 1)
        new[j] = rj
        new[:j] = phi - rj * phi[::-1]
        phi = new
    return phi


def _natural_params(x: np.ndarray, p: int, q: int) -> tuple[float, np.ndarray, np.ndarray]:
    c = float(x[0])
    ar = _pacf_to_coeffs(np.tanh(x[1 : 1 + p]))
    ma = -_pacf_to_coeffs(np.tanh(x[1 + p :]))
    return c, ar, ma


def fit_arma(
    y: Sequence[float],
    p: int,
    q: int,
    d: int = 2,
    tol: float = 1e-8,
    max_iter: int = 500,
    burn: int = 0,
) -> ArimaSpec:
    """Conditional-sum-of-squares fit of an ARMA(p, q) with intercept.

    `y` is the already-differenced series.  Coefficients are parameterised
    through partial autocorrelations so the AR part stays stationary and
    the MA part invertible; starting from zero coefficients, a bounded
    quasi-Newton search minimises the residual sum of squares.  `burn`
    extends the conditioning prefix beyond the p values the recursion
    already skips, letting callers score different orders on a common
    sample.
    """
    y = np.asarray(y, dtype=float)
    if y.size < max(p, q, burn) + 5:
        raise InsufficientHistory(f"need at least {max(p, q, burn) + 5} points, got {y.size}")

    if np.allclose(y, y[0]):
        # Constant (possibly all-zero) input: intercept-only perfect fit.
        return ArimaSpec(p, d, q, float(y[0]), (0.0,) * p, (0.0,) * q, 0.0, degenerate=True)

    skip = max(burn - p, 0)

    def objective(x: np.ndarray) -> float:
        c, ar, ma = _natural_params(x, p, q)
        eps = _css_residuals(y, c, ar, ma)[skip:]
        ssr = float(eps @ eps)
        return ssr if math.isfinite(ssr) else 1e300

    # tanh(5) is within 1e-4 of the region boundary; bounding the raw
    # parameters keeps the search away from the flat saturated tails.
    bounds = [(None, None)] + [(-5.0, 5.0)] * (p + q)
    best = None
    starts = [np.zeros(p + q)]
    if p + q:
        starts.append(np.full(p + q, -0.5))
        starts.append(np.full(p + q, 0.5))
    for start in starts:
        x0 = np.concatenate([[float(y.mean())], start])
        result = optimize.minimize(
            objective,
            x0,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": max_iter, "ftol": tol, "gtol": 1e-10},
        )
        if best is None or result.fun < best.fun:
            best = result
    c, ar, ma = _natural_params(best.x, p, q)
    eps = _css_residuals(y, c, ar, ma)[skip:]
    sigma2 = float(eps @ eps) / eps.size
    spec = ArimaSpec(
        p, d, q, c, tuple(ar), tuple(ma), sigma2, degenerate=sigma2 == 0.0
    )
    if not best.success:
        raise FitConvergenceError(f"CSS fit did not converge: {best.message}", spec)
    return spec


def fit_ma(series_diff: Sequence[float], q: int, d: int = 2) -> ArimaSpec:
    """Pure moving-average fit (no AR terms) on a differenced series."""
    return fit_arma(series_diff, 0, q, d=d)


def forecast_one(spec: ArimaSpec, pool: HistoryPool) -> Forecast:
    """One-step-ahead forecast of the next (undifferenced) load value.

    Runs the residual recursion over the differenced pool with the fitted
    coefficients, forecasts the next differenced value (future shock set to
    zero), then undoes the differencing and clamps at zero.
    """
    y = pool.series
    need = spec.d + max(spec.p, spec.q, 1)
    if y.size < need:
        raise InsufficientHistory(f"need at least {need} observations, got {y.size}")
    w = difference(y, spec.d)
    ar = np.asarray(spec.ar_coeffs)
    ma = np.asarray(spec.ma_coeffs)
    eps_tail = np.zeros(w.size)
    if w.size > spec.p:
        eps_tail[spec.p :] = _css_residuals(w, spec.c, ar, ma)
    next_diff = spec.c
    for i in range(spec.p):
        if w.size - 1 - i >= 0:
            next_diff += ar[i] * w[w.size - 1 - i]
    for j in range(spec.q):
        if w.size - 1 - j >= spec.p:
            next_diff += ma[j] * eps_tail[w.size - 1 - j]
    # Undo the d differences using the last value at each difference level.
    value = next_diff
    for level in range(spec.d - 1, -1, -1):
        value += np.diff(y, n=level)[-1]
    value = max(0.0, float(value))
    return Forecast(value, max(0, int(math.floor(value + 0.5))))


def masw(pool: HistoryPool, w: int) -> Forecast:
    """Moving average over the last w observations."""
    if w < 1:
        raise ValueError("window must be >= 1")
    if len(pool) < w:
        raise InsufficientHistory(f"need {w} observations, got {len(pool)}")
    value = float(np.mean(pool.series[-w:]))
    return Forecast(value, max(0, int(math.floor(value + 0.5))))


def gaussian_log_likelihood(residuals: np.ndarray) -> float:
    n = residuals.size
    sigma2 = float(residuals @ residuals) / n
    if sigma2 <= 0.0:
        return math.inf
    return -0.5 * n * (math.log(2.0 * math.pi * sigma2) + 1.0)


def aic_from_loglik(k: int, log_lik: float) -> float:
    return 2.0 * k - 2.0 * log_lik


def aic(spec: ArimaSpec, series_diff: Sequence[float]) -> float:
    """Akaike information criterion of the fitted model on its training data.

    Parameter count is p + q + 1 (intercept); the likelihood is Gaussian
    with the residual variance implied by the CSS recursion.
    """
    y = np.asarray(series_diff, dtype=float)
    eps = _css_residuals(y, spec.c, np.asarray(spec.ar_coeffs), np.asarray(spec.ma_coeffs))
    return aic_from_loglik(spec.p + spec.q + 1, gaussian_log_likelihood(eps))


def dw(residuals: Sequence[float]) -> float:
    """Durbin-Watson statistic; near 2 means no first-order autocorrelation."""
    e = np.asarray(residuals, dtype=float)
    if e.size < 2:
        raise ValueError("need at least 2 residuals")
    denom = float(e @ e)
    if denom == 0.0:
        raise ValueError("Durbin-Watson undefined for all-zero residuals")
    return float(np.sum(np.diff(e) ** 2)) / denom


@dataclass(frozen=True)
class ModelSelection:
    order: tuple[int, int]  # chosen (p, q)
    grid: dict[tuple[int, int], DiagnosticReport]
    dw_gate_failed: bool


def select_model(
    training_series: Sequence[float],
    p_max: int = 3,
    q_max: int = 3,
    d: int = 2,
    dw_gate: float = 0.3,
) -> ModelSelection:
    """Fit the whole (p, q) grid on the d-differenced training series.

    The chosen order minimises AIC among models whose Durbin-Watson score is
    within `dw_gate` of 2; if no model passes the gate, the overall AIC
    minimum is returned with a warning flag.  All orders are fitted and
    scored on the residuals after a common `p_max`-long conditioning
    prefix, so AIC differences reflect fit rather than sample length.
    """
    w = difference(training_series, d)
    grid: dict[tuple[int, int], DiagnosticReport] = {}
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            try:
                spec = fit_arma(w, p, q, d=d, burn=p_max)
            except FitConvergenceError as err:
                spec = err.best
            eps = _css_residuals(
                w, spec.c, np.asarray(spec.ar_coeffs), np.asarray(spec.ma_coeffs)
            )[max(p_max - p, 0):]
            log_lik = gaussian_log_likelihood(eps)
            try:
                dw_score = dw(eps)
            except ValueError:
                dw_score = math.nan
            grid[(p, q)] = DiagnosticReport(
                aic_from_loglik(p + q + 1, log_lik), dw_score, log_lik
            )

    gated = {
        order: rep
        for order, rep in grid.items()
        if math.isfinite(rep.dw) and abs(rep.dw - 2.0) <= dw_gate and math.isfinite(rep.aic)
    }
    pool = gated if gated else {o: r for o, r in grid.items() if math.isfinite(r.aic)}
    if not pool:
        raise FitConvergenceError(
            "no model produced a finite AIC (degenerate training series)",
            ArimaSpec(0, d, 0, 0.0, (), (), 0.0, degenerate=True),
        )
    chosen = min(pool, key=lambda o: (pool[o].aic, o))
    return ModelSelection(chosen, grid, dw_gate_failed=not gated)
