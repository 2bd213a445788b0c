"""QoS-driven resource allocation across two service classes.

Closed-form single-cycle access failure probabilities for both repetition
modes are inverted into required RB counts, the per-cycle budget is split
by a three-way feasibility classification, and a transfer-fraction sweep
handles negotiation when the budget cannot satisfy both classes at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._util import round_half_up
from .estimation import DEFAULT_ENUMERATION_CAP, EnumerationCapExceeded, _log_pmf_rows, \
    composition_count, compositions_array, design_matrix
from .gfsim import ADJACENT, ARBITRARY, GfConfig

COND_1 = "cond1"
COND_2 = "cond2"
COND_3_OUTAGE = "cond3_outage"

DEFAULT_W_CAP = 1024
DEFAULT_IDLE_FLOOR = 2


class AllocationOutage(RuntimeError):
    """The RB budget cannot cover even the minimum commitments."""


@dataclass(frozen=True)
class QosContract:
    """Reliability requirement of one service class within one cycle."""

    reliability_min: float
    reliability_ideal: Optional[float] = None
    priority: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.reliability_min < 1.0):
            raise ValueError("reliability_min must be in (0, 1)")
        if self.reliability_ideal is not None and not (
            self.reliability_min <= self.reliability_ideal < 1.0
        ):
            raise ValueError("need reliability_min <= reliability_ideal < 1")


@dataclass(frozen=True)
class RequiredRbs:
    w: int
    met: bool  # False when even w_cap RBs cannot reach the target


@dataclass(frozen=True)
class AllocationDecision:
    w1: int  # RBs for event A (bursty / negotiation beneficiary)
    w2: int  # RBs for event B (uniform)
    condition: str
    expected_qos: tuple[float, float]
    w_req: int
    w_ideal: int
    w_min: int
    w_neg_max: int
    delta: Optional[float] = None


@dataclass(frozen=True)
class NegotiationResult:
    delta: Optional[float]  # smallest feasible transfer fraction, None = outage
    deltas: np.ndarray
    fail_a: np.ndarray
    fail_b: np.ndarray

    @property
    def outage(self) -> bool:
        return self.delta is None


def _slot_collision_probs(w: int, n_max: int) -> np.ndarray:
    """P(a tagged replica collides) in a slot with j total users, j = 0..n_max.

    Equals 1 - ((w-1)/w)^(j-1): some other user of the slot picks the tagged
    user's RB.  Index 0 is unused (a tagged user implies j >= 1) and set to 0.
    """
    j = np.arange(n_max + 1, dtype=float)
    with np.errstate(divide="ignore"):
        probs = 1.0 - ((w - 1.0) / w) ** np.maximum(j - 1.0, 0.0)
    probs[0] = 0.0
    return probs


def fail_prob_adjacent(
    w: int, n: int, k: int, t: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> float:
    """Single-cycle failure probability under adjacent occupation.

    Averages, over all start vectors and the tagged user's own start slot,
    the probability that every one of its k consecutive replicas collides.
    Exact for the simulated access model.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if w < 1:
        raise ValueError("w must be >= 1")
    if not (1 <= k <= t):
        raise ValueError("need 1 <= k <= t")
    if n == 1:
        return 0.0
    slots = t - k + 1
    if composition_count(n, slots) > cap:
        raise EnumerationCapExceeded(
            f"{composition_count(n, slots)} start vectors exceed cap {cap}"
        )
    phis = compositions_array(n, slots, cap)
    loads = (phis @ design_matrix(t, k).T).astype(np.int64)  # (n_phi, t)
    collide = _slot_collision_probs(w, n)[loads]  # (n_phi, t)
    pmf = np.exp(_log_pmf_rows(phis, n))
    # Product over each k-wide window of slots, one window per start slot.
    windows = np.empty((phis.shape[0], slots))
    for r in range(slots):
        windows[:, r] = collide[:, r : r + k].prod(axis=1)
    per_phi = (phis / n * windows).sum(axis=1)
    return float(pmf @ per_phi)


def fail_prob_arbitrary(w: int, n: int, k: int, t: int) -> float:
    """Single-cycle failure probability under arbitrary occupation.

    Mean-field approximation: every slot carries e = n k / t users on
    average, so each replica collides with probability 1 - ((w-1)/w)^(e-1),
    independently across the k replicas.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if w < 1:
        raise ValueError("w must be >= 1")
    if not (1 <= k <= t):
        raise ValueError("need 1 <= k <= t")
    e = n * k / t
    if w == 1:
        collide = 0.0 if e <= 1.0 else 1.0
    else:
        collide = 1.0 - ((w - 1.0) / w) ** (e - 1.0)
        collide = min(1.0, max(0.0, collide))
    return collide**k


def fail_prob(w: int, n: int, k: int, t: int, occupation: str) -> float:
    if occupation == ADJACENT:
        return fail_prob_adjacent(w, n, k, t)
    if occupation == ARBITRARY:
        return fail_prob_arbitrary(w, n, k, t)
    raise ValueError(f"unknown occupation {occupation!r}")


def required_rbs(
    contract_reliability: float,
    n: int,
    k: int,
    t: int,
    occupation: str,
    w_cap: int = DEFAULT_W_CAP,
) -> RequiredRbs:
    """Smallest RB count whose failure probability meets the reliability.

    Failure probability is nonincreasing in w, so an increasing scan from
    w = 1 finds the minimum; if even `w_cap` RBs cannot meet the target the
    cap is returned with `met=False`.
    """
    if not (0.0 < contract_reliability < 1.0):
        raise ValueError("reliability must be in (0, 1)")
    if n <= 0:
        return RequiredRbs(0, True)
    budget = 1.0 - contract_reliability
    for w in range(1, w_cap + 1):
        if fail_prob(w, n, k, t, occupation) <= budget:
            return RequiredRbs(w, True)
    return RequiredRbs(w_cap, False)


def allocate(
    pred_a: float,
    pred_b: float,
    contracts: tuple[QosContract, QosContract],
    w_all: int,
    cfg: GfConfig,
    floor_rbs: int = DEFAULT_IDLE_FLOOR,
    w_cap: int = DEFAULT_W_CAP,
) -> AllocationDecision:
    """Split `w_all` RBs between bursty event A and uniform event B.

    A's requirement is sized at its minimum reliability; B is granted its
    ideal allocation when the budget allows, can donate down to its minimum
    allocation when A is squeezed, and keeps its minimum in the outage
    regime where A takes whatever is left.  A always keeps at least
    `floor_rbs` RBs so an unannounced burst onset is never resourceless.
    """
    if w_all < 1:
        raise ValueError("w_all must be >= 1")
    contract_a, contract_b = contracts
    n_a = round_half_up(pred_a) if pred_a > 0 else 0
    n_b = round_half_up(pred_b) if pred_b > 0 else 0
    k, t, occ = cfg.k, cfg.t_slots, cfg.occupation

    ideal_b = contract_b.reliability_ideal
    if ideal_b is None:
        ideal_b = contract_b.reliability_min
    w_ideal = required_rbs(ideal_b, n_b, k, t, occ, w_cap).w
    w_min = required_rbs(contract_b.reliability_min, n_b, k, t, occ, w_cap).w
    w_neg_max = w_ideal - w_min

    if w_all < w_min + floor_rbs:
        raise AllocationOutage(
            f"budget {w_all} cannot cover B's minimum {w_min} plus A's floor {floor_rbs}"
        )

    def reliability(w: int, n: int) -> float:
        if n <= 0:
            return 1.0
        if w <= 0:
            return 0.0
        return 1.0 - fail_prob(w, n, k, t, occ)

    req = required_rbs(contract_a.reliability_min, n_a, k, t, occ, w_cap)
    w_req = max(req.w, floor_rbs) if req.met else w_all + w_neg_max + 1
    w_req_reported = max(req.w, floor_rbs)

    if w_req <= w_all - w_ideal:
        w1, w2, condition = w_req, w_ideal, COND_1
    elif w_req <= w_all - w_ideal + w_neg_max:
        w1, w2, condition = w_req, w_all - w_req, COND_2
    else:
        w1, w2, condition = w_all - w_min, w_min, COND_3_OUTAGE

    return AllocationDecision(
        w1=w1,
        w2=w2,
        condition=condition,
        expected_qos=(reliability(w1, n_a), reliability(w2, n_b)),
        w_req=w_req_reported,
        w_ideal=w_ideal,
        w_min=w_min,
        w_neg_max=w_neg_max,
    )


def negotiate_delta(
    w_a: int,
    w_b: int,
    pred_a: float,
    pred_b: float,
    contracts: tuple[QosContract, QosContract],
    cfg: GfConfig,
    step: float = 0.05,
) -> NegotiationResult:
    """Sweep the fraction of A's RBs transferred to B.

    At fraction delta, A keeps round(w_a (1 - delta)) RBs and B holds
    w_b + round(w_a delta).  Returns the smallest delta meeting both
    reliability floors, or an outage marker when no grid point does.
    """
    if w_a < 0 or w_b < 0:
        raise ValueError("RB counts must be >= 0")
    contract_a, contract_b = contracts
    n_a = round_half_up(pred_a) if pred_a > 0 else 0
    n_b = round_half_up(pred_b) if pred_b > 0 else 0
    k, t, occ = cfg.k, cfg.t_slots, cfg.occupation

    def failure(w: int, n: int) -> float:
        if n <= 0:
            return 0.0
        if w <= 0:
            return 1.0
        return fail_prob(w, n, k, t, occ)

    deltas = np.round(np.arange(0.0, 1.0 + step / 2.0, step), 10)
    fail_a = np.empty(deltas.size)
    fail_b = np.empty(deltas.size)
    for i, delta in enumerate(deltas):
        fail_a[i] = failure(round_half_up(w_a * (1.0 - float(delta))), n_a)
        fail_b[i] = failure(w_b + round_half_up(w_a * float(delta)), n_b)

    ok = (fail_a <= 1.0 - contract_a.reliability_min) & (
        fail_b <= 1.0 - contract_b.reliability_min
    )
    chosen = float(deltas[int(np.argmax(ok))]) if ok.any() else None
    return NegotiationResult(chosen, deltas, fail_a, fail_b)
