"""Attach extracted paths to their labeling surface and flag the direct path.

In single mode a path inherits the one surface that toggled during its
slots.  In multi mode the sequence of consecutive-slot gain ratios is a
surface-specific signature: the path goes to the surface whose scheduled
ratio sequence is closest in the complex plane.  Per surface, the path with
the largest attenuation-coefficient magnitude is marked as line of sight.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError, UndecidableError
from .flipping import MULTI, SINGLE, PhaseSchedule
from .mnomp import ExtractedPath

# Gain-ratio denominators below this fraction of the path's peak gain are skipped.
RATIO_FLOOR = 1e-3


@dataclass
class LabeledPath:
    """An extracted path annotated with its surface, attenuation coefficient,
    line-of-sight flag, and the score of the ratio match (0 in single mode)."""

    base: ExtractedPath
    ris_id: int
    beta: complex
    is_los: bool = False
    association_score: float = 0.0


def estimate_beta(path: ExtractedPath, schedule: PhaseSchedule, k: int) -> complex:
    """Average of per-slot gains divided by the surface's phase-factor change."""
    slots = [t for t in schedule.active_slots(k) if t in path.gains]
    if not slots:
        raise UndecidableError(f"path has no gains on surface {k}'s active slots")
    total = 0.0 + 0.0j
    for t in slots:
        dg = schedule.delta_gamma(k, t)
        if abs(dg) == 0.0:
            raise ConfigurationError(f"surface {k} has zero phase change at slot {t}")
        total += path.gains[t] / dg
    return total / len(slots)


def ratio_signature(path: ExtractedPath) -> list[complex]:
    """Consecutive-slot gain ratios; unstable entries (tiny denominator) are skipped."""
    slots = sorted(path.gains)
    if len(slots) < 2:
        raise UndecidableError("ratio signature needs gains on at least two consecutive slots")
    floor = RATIO_FLOOR * max(abs(path.gains[t]) for t in slots)
    ratios = []
    for t, t_next in zip(slots[:-1], slots[1:]):
        if t_next != t + 1:
            continue
        denom = path.gains[t_next]
        if abs(denom) < floor:
            ratios.append(None)
        else:
            ratios.append(path.gains[t] / denom)
    if not any(r is not None for r in ratios):
        raise UndecidableError("all gain ratios were numerically unusable")
    return ratios


def select_los(paths: list[LabeledPath]) -> int:
    """Index of the path with the largest |beta|; ties go to the smallest delay."""
    if not paths:
        raise UndecidableError("cannot select a line-of-sight path from an empty list")
    return min(range(len(paths)),
               key=lambda i: (-abs(paths[i].beta), paths[i].base.delay))


def _assign_multi(path: ExtractedPath, schedule: PhaseSchedule) -> tuple[int, float]:
    observed = ratio_signature(path)
    best_k, best_score = None, None
    for k in range(1, schedule.ris_count + 1):
        scheduled = schedule.ratio_sequence(k)
        score = 0.0
        used = 0
        for obs, sched in zip(observed, scheduled):
            if obs is None:
                continue
            score += abs(obs - sched)
            used += 1
        if used == 0:
            continue
        if best_score is None or score < best_score:
            best_k, best_score = k, score
    if best_k is None:
        raise UndecidableError("no usable ratios for association")
    return best_k, float(best_score)


def _assign_single(path: ExtractedPath, schedule: PhaseSchedule) -> int:
    slots = set(path.gains)
    matches = [k for k in range(1, schedule.ris_count + 1)
               if slots <= set(schedule.active_slots(k))]
    if len(matches) != 1:
        raise ConfigurationError(
            "single-mode path slots must fall inside exactly one surface's active slots")
    return matches[0]


def associate(paths: list[ExtractedPath], schedule: PhaseSchedule) -> list[LabeledPath]:
    """Label every path with its surface and mark one line-of-sight path per surface.

    Multi-mode paths whose ratio signature is numerically unusable are
    dropped (they carry no label information).
    """
    labeled: list[LabeledPath] = []
    for path in paths:
        if schedule.mode == SINGLE:
            k = _assign_single(path, schedule)
            score = 0.0
        elif schedule.mode == MULTI:
            try:
                k, score = _assign_multi(path, schedule)
            except UndecidableError:
                continue
        else:
            raise ConfigurationError(f"unknown schedule mode: {schedule.mode!r}")
        beta = estimate_beta(path, schedule, k)
        labeled.append(LabeledPath(path, k, beta, False, score))
    for k in {lp.ris_id for lp in labeled}:
        group = [lp for lp in labeled if lp.ris_id == k]
        group[select_los(group)].is_los = True
    return labeled
