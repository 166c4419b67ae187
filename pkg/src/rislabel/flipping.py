"""Surface phase schedules and differential snapshots.

Subtracting the first slot from every later slot cancels all contributions
that do not change over time, leaving only paths whose labeling surface
toggled.  Two scheduling modes are supported: toggling one surface per slot
(isolated differences) and toggling every surface each slot with distinct
increments (superposed differences told apart by gain-ratio signatures).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .channel import CsiSnapshot
from .errors import ConfigurationError, RejectedInputError

SINGLE = "single"
MULTI = "multi"

_TOGGLE_TOL = 1e-12


@dataclass(frozen=True)
class PhaseSchedule:
    """Uniform surface phase per (surface, slot); phases[k-1, t-1] in radians."""

    mode: str
    slots: int
    phases: np.ndarray

    def __post_init__(self):
        if self.mode not in (SINGLE, MULTI):
            raise ConfigurationError(f"unknown schedule mode: {self.mode!r}")
        phases = np.asarray(self.phases, dtype=float)
        if phases.ndim != 2 or phases.shape[1] != self.slots or self.slots < 1:
            raise ConfigurationError("phase table must have shape (ris_count, slots)")
        object.__setattr__(self, "phases", phases)
        if self.mode == SINGLE:
            for t in range(2, self.slots + 1):
                toggled = [k for k in range(1, self.ris_count + 1)
                           if abs(self.delta_gamma(k, t)) > _TOGGLE_TOL]
                if len(toggled) != 1:
                    raise ConfigurationError(
                        f"single mode requires exactly one toggled surface at slot {t}")

    @property
    def ris_count(self) -> int:
        return int(self.phases.shape[0])

    def phase(self, k: int, t: int) -> float:
        return float(self.phases[k - 1, t - 1])

    def gamma(self, k: int, t: int) -> complex:
        return cmath.exp(1j * self.phase(k, t))

    def delta_gamma(self, k: int, t: int) -> complex:
        if t < 2:
            raise RejectedInputError("differential slots start at t=2")
        return self.gamma(k, t) - self.gamma(k, 1)

    def active_slots(self, k: int) -> tuple[int, ...]:
        """Slots where surface k actually toggles relative to slot 1."""
        return tuple(t for t in range(2, self.slots + 1)
                     if abs(self.delta_gamma(k, t)) > _TOGGLE_TOL)

    def active_at(self, t: int) -> frozenset[int]:
        return frozenset(k for k in range(1, self.ris_count + 1)
                         if abs(self.delta_gamma(k, t)) > _TOGGLE_TOL)

    def ratio_sequence(self, k: int) -> np.ndarray:
        """Consecutive-slot difference ratios delta_gamma(t)/delta_gamma(t+1)."""
        return np.array([self.delta_gamma(k, t) / self.delta_gamma(k, t + 1)
                         for t in range(2, self.slots)])

    def to_table(self) -> list[tuple[int, int, float]]:
        return [(k, t, self.phase(k, t))
                for k in range(1, self.ris_count + 1)
                for t in range(1, self.slots + 1)]


def schedule_from_table(mode: str, table) -> PhaseSchedule:
    """Rebuild a schedule from explicit (surface, slot, phase) rows."""
    rows = [(int(k), int(t), float(phi)) for k, t, phi in table]
    ris_count = max(k for k, _, _ in rows)
    slots = max(t for _, t, _ in rows)
    phases = np.full((ris_count, slots), np.nan)
    for k, t, phi in rows:
        phases[k - 1, t - 1] = phi
    if np.any(np.isnan(phases)):
        raise ConfigurationError("phase table must cover every (surface, slot) pair")
    return PhaseSchedule(mode, slots, phases)


def _multi_increments(ris_count: int, slots: int) -> np.ndarray:
    """Per-surface base increments for the all-toggle mode.

    Even slots apply the increment once, odd slots twice, repeating as a
    two-phase cycle.  The denominator is grown until no surface lands back
    on its slot-1 phase and all pairwise ratio signatures are distinct.
    """
    denom = ris_count + 1
    while True:
        deltas = 2.0 * math.pi * np.arange(1, ris_count + 1) / denom
        ok = all(abs(cmath.exp(1j * d * m) - 1.0) > 1e-9 for d in deltas for m in (1, 2))
        if ok:
            ratios = [(cmath.exp(1j * d) - 1.0) / (cmath.exp(1j * 2 * d) - 1.0) for d in deltas]
            ok = all(abs(ratios[i] - ratios[j]) > 1e-9
                     for i in range(ris_count) for j in range(i + 1, ris_count))
        if ok:
            return deltas
        denom += 1
        if denom > 8 * (ris_count + 1):
            raise ConfigurationError("could not find distinguishable phase increments")


def make_schedule(mode: str, ris_count: int, slots: int, base_phases=None) -> PhaseSchedule:
    """Build a labeling schedule.

    single: slot t toggles surface ((t-2) mod K)+1 by pi while the others
    hold their slot-1 phase.  multi: every surface toggles every slot with
    per-surface increments applied once on even slots and twice on odd
    slots; with one surface the two modes coincide.
    """
    if slots < 2:
        raise ConfigurationError("a labeling schedule needs at least two slots")
    if ris_count < 1:
        raise ConfigurationError("need at least one labeling surface")
    base = np.zeros(ris_count) if base_phases is None else \
        np.asarray(base_phases, dtype=float).reshape(ris_count)
    phases = np.tile(base[:, None], (1, slots))
    if mode == SINGLE or ris_count == 1:
        for t in range(2, slots + 1):
            k = (t - 2) % ris_count
            phases[k, t - 1] = base[k] + math.pi
        return PhaseSchedule(SINGLE if mode == SINGLE else mode, slots, phases)
    if mode != MULTI:
        raise ConfigurationError(f"unknown schedule mode: {mode!r}")
    if slots < 3:
        raise ConfigurationError("multi mode needs at least three slots to form ratio signatures")
    deltas = _multi_increments(ris_count, slots)
    for t in range(2, slots + 1):
        mult = 1 if t % 2 == 0 else 2
        phases[:, t - 1] = base + deltas * mult
    schedule = PhaseSchedule(MULTI, slots, phases)
    _validate_multi(schedule)
    return schedule


def _validate_multi(schedule: PhaseSchedule) -> None:
    seqs = [schedule.ratio_sequence(k) for k in range(1, schedule.ris_count + 1)]
    for i in range(len(seqs)):
        for j in range(i + 1, len(seqs)):
            if np.max(np.abs(seqs[i] - seqs[j])) <= 1e-9:
                raise ConfigurationError(
                    f"surfaces {i + 1} and {j + 1} have identical ratio signatures")


def delta_gamma(schedule: PhaseSchedule, k: int, t: int) -> complex:
    """Change of the surface phase factor between slot t and slot 1."""
    return schedule.delta_gamma(k, t)


@dataclass(frozen=True)
class DeltaSnapshot:
    """Differential measurement y(t) - y(1) with the surfaces toggled at t."""

    t: int
    data: np.ndarray
    active_ris: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "data", np.asarray(self.data, dtype=complex).reshape(-1))
        if self.t < 2:
            raise RejectedInputError("differential slots start at t=2")


def delta(y_t: CsiSnapshot, y_1: CsiSnapshot,
          schedule: PhaseSchedule | None = None) -> DeltaSnapshot:
    """Subtract the baseline slot; static contributions cancel, noise variance doubles."""
    if y_1.t != 1:
        raise RejectedInputError("the baseline snapshot must be slot 1")
    if y_t.data.shape != y_1.data.shape:
        raise RejectedInputError("snapshot dimensions do not match")
    active = schedule.active_at(y_t.t) if schedule is not None else frozenset()
    return DeltaSnapshot(y_t.t, y_t.data - y_1.data, active)
