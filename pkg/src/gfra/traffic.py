"""Per-cycle arrival counts for uniform and bursty URLLC traffic.

Bursty devices activate over a finite window following a Beta-shaped
activation-time profile; integrating the profile over each scheduling cycle
gives a deterministic per-cycle arrival count.  Motion-control style traffic
is modelled as a constant number of arrivals per cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._util import round_half_up

# Absolute tolerance for the per-cycle quadrature of the activation density.
_QUAD_ABS_TOL = 1e-10


@dataclass(frozen=True)
class BetaBurstSpec:
    """A burst of `n_total` devices activating over `duration_ms`.

    Activation times follow a Beta(alpha, beta) density stretched over the
    burst window; arrivals are counted per scheduling cycle of length
    `cycle_len_ms`.
    """

    n_total: int
    duration_ms: float
    alpha: float = 3.0
    beta: float = 4.0
    cycle_len_ms: float = 1.25

    def __post_init__(self) -> None:
        if self.n_total < 0:
            raise ValueError("n_total must be >= 0")
        if self.duration_ms <= 0:
            raise ValueError("duration_ms must be > 0")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("Beta shape parameters must be > 0")
        if self.cycle_len_ms <= 0:
            raise ValueError("cycle_len_ms must be > 0")

    @property
    def n_cycles(self) -> int:
        # Tiny epsilon so exact multiples are not lost to float division.
        return int(math.floor(self.duration_ms / self.cycle_len_ms + 1e-9))

    def density(self, t_ms: float) -> float:
        """Activation density at time t (ms); integrates to 1 over the window."""
        d, a, b = self.duration_ms, self.alpha, self.beta
        if t_ms < 0.0 or t_ms > d:
            return 0.0
        norm = math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
        return (t_ms ** (a - 1.0)) * ((d - t_ms) ** (b - 1.0)) / (d ** (a + b - 1.0) * norm)


@dataclass(frozen=True)
class UniformSpec:
    """Constant arrival intensity: the same user count every cycle."""

    users_per_cycle: int

    def __post_init__(self) -> None:
        if self.users_per_cycle < 0:
            raise ValueError("users_per_cycle must be >= 0")


@dataclass(frozen=True)
class ArrivalTrace:
    """Arrival counts, one entry per scheduling cycle."""

    per_cycle_counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self) -> None:
        counts = np.asarray(self.per_cycle_counts, dtype=np.int64)
        if counts.ndim != 1:
            raise ValueError("per_cycle_counts must be one-dimensional")
        if (counts < 0).any():
            raise ValueError("arrival counts must be >= 0")
        object.__setattr__(self, "per_cycle_counts", counts)

    def __len__(self) -> int:
        return int(self.per_cycle_counts.shape[0])

    def __getitem__(self, i: int) -> int:
        return int(self.per_cycle_counts[i])

    @property
    def total(self) -> int:
        return int(self.per_cycle_counts.sum())


def beta_arrivals(spec: BetaBurstSpec) -> ArrivalTrace:
    """Deterministic per-cycle arrival counts for a Beta-shaped burst.

    Cycle i receives n_total times the density mass falling inside that
    cycle, rounded half-up.  The rounding residual is assigned to the peak
    cycle so the trace total equals n_total exactly.
    """
    n_cycles = spec.n_cycles
    if n_cycles == 0:
        return ArrivalTrace(np.zeros(0, dtype=np.int64))
    edges = np.arange(n_cycles + 1) * spec.cycle_len_ms
    raw = np.empty(n_cycles)
    for i in range(n_cycles):
        mass, _ = integrate.quad(spec.density, edges[i], edges[i + 1], epsabs=_QUAD_ABS_TOL)
        raw[i] = spec.n_total * mass
    counts = np.array([round_half_up(v) for v in raw], dtype=np.int64)
    residual = spec.n_total - int(counts.sum())
    if residual != 0:
        peak = int(np.argmax(raw))
        counts[peak] += residual
        if counts[peak] < 0:
            raise ValueError("rounding residual exceeded the peak cycle count")
    return ArrivalTrace(counts)


def uniform_arrivals(spec: UniformSpec, n_cycles: int) -> ArrivalTrace:
    """Constant trace: `users_per_cycle` arrivals in each of `n_cycles` cycles."""
    if n_cycles < 0:
        raise ValueError("n_cycles must be >= 0")
    return ArrivalTrace(np.full(n_cycles, spec.users_per_cycle, dtype=np.int64))
