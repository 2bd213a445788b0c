"""Slot-level simulation of K-repetition grant-free access.

One access cycle is a subframe of `t_slots` slots with `w` resource blocks
(RBs) per slot.  Every active user transmits K replicas, one RB per slot,
either in K consecutive slots (adjacent occupation) or in K arbitrary
distinct slots.  An RB picked by exactly one user in a slot carries a
successful replica; an RB picked by two or more users is a collision.  A
user succeeds when at least one replica is collision-free; otherwise it
retries in the next cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ._util import as_generator, philox_stream
from .traffic import ArrivalTrace

ADJACENT = "adjacent"
ARBITRARY = "arbitrary"


@dataclass(frozen=True)
class GfConfig:
    """Static parameters of the grant-free access procedure."""

    w: int
    t_slots: int
    k: int
    occupation: str = ADJACENT
    slot_ms: float = 0.125
    gap_slots: int = 2

    def __post_init__(self) -> None:
        if self.w < 1:
            raise ValueError("w must be >= 1")
        if not (1 <= self.k <= self.t_slots):
            raise ValueError("need 1 <= k <= t_slots")
        if self.occupation not in (ADJACENT, ARBITRARY):
            raise ValueError(f"unknown occupation {self.occupation!r}")
        if self.slot_ms <= 0:
            raise ValueError("slot_ms must be > 0")
        if self.gap_slots < 0:
            raise ValueError("gap_slots must be >= 0")

    @property
    def n_start_slots(self) -> int:
        """Slots in which a first replica may start (adjacent occupation)."""
        return self.t_slots - self.k + 1

    @property
    def cycle_ms(self) -> float:
        """Length of a scheduling cycle: access slots plus broadcast gap."""
        return (self.t_slots + self.gap_slots) * self.slot_ms

    def with_w(self, w: int) -> "GfConfig":
        return replace(self, w=w)


class SlotObservation(NamedTuple):
    """Per-slot RB state counts seen by the base station."""

    a: int  # RBs chosen by exactly one user (successes)
    b: int  # RBs chosen by two or more users (collisions)
    c: int  # idle RBs


@dataclass(frozen=True)
class CycleObservation:
    """Slot observations for one full access cycle."""

    slots: tuple[SlotObservation, ...]
    w: int

    def __post_init__(self) -> None:
        for s in self.slots:
            if s.a < 0 or s.b < 0 or s.c < 0 or s.a + s.b + s.c != self.w:
                raise ValueError(f"slot counts {s} do not partition {self.w} RBs")

    def __len__(self) -> int:
        return len(self.slots)

    def totals(self) -> SlotObservation:
        return SlotObservation(
            sum(s.a for s in self.slots),
            sum(s.b for s in self.slots),
            sum(s.c for s in self.slots),
        )

    @classmethod
    def from_array(cls, counts: np.ndarray, w: int) -> "CycleObservation":
        return cls(tuple(SlotObservation(int(a), int(b), int(c)) for a, b, c in counts), w)


@dataclass(frozen=True)
class UserOutcome:
    """One user's replica placement and result within a single cycle."""

    user_id: int
    slots: tuple[int, ...]  # 1-based slot indices carrying this user's replicas
    succeeded: bool
    first_success_slot: Optional[int]  # 1-based, None on failure

    @property
    def start_slot(self) -> int:
        return self.slots[0]


@dataclass(frozen=True)
class CycleResult:
    observation: CycleObservation
    outcomes: tuple[UserOutcome, ...]
    n_active: int
    n_total_pop: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n_active != len(self.outcomes):
            raise ValueError("n_active must equal the number of outcomes")


@dataclass(frozen=True)
class DelayRecord:
    """Access delay of one user across however many cycles it needed."""

    user_id: int
    arrival_cycle: int  # 0-based scheduling-cycle index
    succeeded: bool
    delay_ms: float  # math.inf when never served within the horizon
    success_cycle: Optional[int] = None


def _draw_slots(cfg: GfConfig, n: int, gen: np.random.Generator) -> np.ndarray:
    """Replica slot indices (0-based), shape (n, k).

    Forced choices (a single admissible start, or k == t_slots) consume no
    randomness, so adjacent and arbitrary modes draw identical RB streams
    whenever the slot pattern is deterministic.
    """
    t, k = cfg.t_slots, cfg.k
    if cfg.occupation == ADJACENT:
        m = cfg.n_start_slots
        if m == 1:
            starts = np.zeros(n, dtype=np.int64)
        else:
            starts = gen.integers(0, m, size=n)
        return starts[:, None] + np.arange(k)[None, :]
    if k == t:
        return np.tile(np.arange(t), (n, 1))
    # Uniform k-subset of {0..t-1} per user: keep the k smallest of t
    # i.i.d. uniforms, then sort the chosen slot indices.
    u = gen.random((n, t))
    subset = np.argpartition(u, k, axis=1)[:, :k]
    return np.sort(subset, axis=1)


def simulate_cycle(
    cfg: GfConfig,
    n_active: int,
    rng: int | np.random.Generator,
    n_total_pop: Optional[int] = None,
) -> CycleResult:
    """Simulate one access cycle with `n_active` users.

    Deterministic given (cfg, n_active, rng seed).
    """
    if n_active < 0:
        raise ValueError("n_active must be >= 0")
    t, w = cfg.t_slots, cfg.w
    if n_active == 0:
        obs = CycleObservation(tuple(SlotObservation(0, 0, w) for _ in range(t)), w)
        return CycleResult(obs, (), 0, n_total_pop)

    gen = as_generator(rng)
    slot_idx = _draw_slots(cfg, n_active, gen)
    rbs = gen.integers(0, w, size=slot_idx.shape)

    occupancy = np.zeros((t, w), dtype=np.int64)
    np.add.at(occupancy, (slot_idx.ravel(), rbs.ravel()), 1)

    replica_ok = occupancy[slot_idx, rbs] == 1
    succeeded = replica_ok.any(axis=1)
    first_col = np.argmax(replica_ok, axis=1)

    outcomes = []
    for u in range(n_active):
        ok = bool(succeeded[u])
        first = int(slot_idx[u, first_col[u]]) + 1 if ok else None
        outcomes.append(
            UserOutcome(
                user_id=u,
                slots=tuple(int(s) + 1 for s in slot_idx[u]),
                succeeded=ok,
                first_success_slot=first,
            )
        )

    per_slot = np.stack(
        [
            (occupancy == 1).sum(axis=1),
            (occupancy >= 2).sum(axis=1),
            (occupancy == 0).sum(axis=1),
        ],
        axis=1,
    )
    obs = CycleObservation.from_array(per_slot, w)
    return CycleResult(obs, tuple(outcomes), n_active, n_total_pop)


def simulate_retry_chain(
    cfg: GfConfig,
    arrivals: ArrivalTrace | Sequence[int],
    rng_seed: int,
    truncation_ms: float = 10.0,
) -> list[DelayRecord]:
    """Run consecutive cycles, carrying failed users into the next cycle.

    A user's delay is (cycles waited) * cycle_ms plus the 1-based index of
    its first collision-free replica slot times slot_ms.  Users still
    unserved `truncation_ms` after their arrival are reported with infinite
    delay (the caller keeps them as tail mass, never drops them).
    """
    counts = [int(c) for c in arrivals]
    if truncation_ms <= 0:
        raise ValueError("truncation_ms must be > 0")
    # Attempts allowed per user before it is reported as unserved tail mass.
    max_attempts = int(math.ceil(truncation_ms / cfg.cycle_ms)) + 1

    records: list[DelayRecord] = []
    pending: list[tuple[int, int]] = []  # (user_id, arrival_cycle)
    next_id = 0
    cycle = 0
    while cycle < len(counts) or pending:
        new = counts[cycle] if cycle < len(counts) else 0
        roster = list(pending) + [(next_id + i, cycle) for i in range(new)]
        next_id += new
        result = simulate_cycle(cfg, len(roster), philox_stream(rng_seed, cycle))
        pending = []
        for (uid, arr), outcome in zip(roster, result.outcomes):
            if outcome.succeeded:
                waited = cycle - arr
                delay = waited * cfg.cycle_ms + outcome.first_success_slot * cfg.slot_ms
                records.append(DelayRecord(uid, arr, True, delay, cycle))
            elif cycle - arr + 1 >= max_attempts:
                records.append(DelayRecord(uid, arr, False, math.inf))
            else:
                pending.append((uid, arr))
        cycle += 1
    records.sort(key=lambda r: r.user_id)
    return records


def mc_failure_rate(
    cfg: GfConfig,
    n_active: int,
    n_cycles: int,
    seed: int,
    batch_size: int = 100_000,
) -> float:
    """Monte Carlo estimate of the single-cycle access failure probability.

    Simulates `n_cycles` independent cycles of `n_active` users each and
    returns the fraction of users whose K replicas all collided.  Vectorised
    over whole batches of cycles so million-cycle runs stay cheap.
    """
    if n_active < 1:
        raise ValueError("n_active must be >= 1")
    t, w, k = cfg.t_slots, cfg.w, cfg.k
    failures = 0
    done = 0
    batch_idx = 0
    while done < n_cycles:
        b = min(batch_size, n_cycles - done)
        gen = philox_stream(seed, batch_idx)
        if cfg.occupation == ADJACENT:
            m = cfg.n_start_slots
            if m == 1:
                starts = np.zeros((b, n_active), dtype=np.int64)
            else:
                starts = gen.integers(0, m, size=(b, n_active))
            slot_idx = starts[..., None] + np.arange(k)
        elif k == t:
            slot_idx = np.broadcast_to(np.arange(t), (b, n_active, t))
        else:
            u = gen.random((b, n_active, t), dtype=np.float32)
            slot_idx = np.argpartition(u, k, axis=2)[..., :k]
        rbs = gen.integers(0, w, size=(b, n_active, k))

        cycle_base = (np.arange(b, dtype=np.int64) * t)[:, None, None]
        keys = ((cycle_base + slot_idx) * w + rbs).ravel()
        occupancy = np.bincount(keys, minlength=b * t * w)
        replica_ok = occupancy[keys].reshape(b, n_active, k) == 1
        failures += int((~replica_ok.any(axis=2)).sum())
        done += b
        batch_idx += 1
    return failures / (n_cycles * n_active)
