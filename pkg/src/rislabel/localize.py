"""Bearing-only receiver localization from anchor sightlines.

Each anchor (transmitter or labeling surface) contributes a line through
its known position along the estimated arrival bearing; the receiver is the
weighted least-squares point minimizing the perpendicular distances to all
lines.  Near-collinear bearings are reported through a conditioning number
that diverges as the geometry degenerates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DegenerateGeometryError, ExtractionError, RejectedInputError
from .mnomp import Grid, StoppingRule, extract

_PARALLEL_TOL = 1e-9


@dataclass(frozen=True)
class BearingObservation:
    """A known anchor position and the bearing from the receiver toward it."""

    anchor: np.ndarray
    aoa: float
    weight: float = 1.0

    def __post_init__(self):
        if self.weight <= 0:
            raise RejectedInputError("bearing weight must be positive")
        object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=float).reshape(2))


@dataclass(frozen=True)
class PositionEstimate:
    """point: 2D estimate (m); residual: weighted RMS perpendicular distance
    to the bearing lines (m); condition: eigenvalue ratio of the normal matrix."""

    point: np.ndarray
    residual: float
    condition: float

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).reshape(2))


def triangulate(observations: list[BearingObservation]) -> PositionEstimate:
    """Weighted least-squares intersection of the bearing lines."""
    if len(observations) < 2:
        raise RejectedInputError("triangulation needs at least two bearings")
    parallel = all(
        abs(math.sin(a.aoa - b.aoa)) < _PARALLEL_TOL
        for i, a in enumerate(observations) for b in observations[i + 1:])
    if parallel:
        raise DegenerateGeometryError("all bearing lines are parallel")

    normal = np.zeros((2, 2))
    rhs = np.zeros(2)
    total_weight = 0.0
    for obs in observations:
        n = np.array([-math.sin(obs.aoa), math.cos(obs.aoa)])
        outer = obs.weight * np.outer(n, n)
        normal += outer
        rhs += outer @ obs.anchor
        total_weight += obs.weight
    point = np.linalg.solve(normal, rhs)

    sq = 0.0
    for obs in observations:
        n = np.array([-math.sin(obs.aoa), math.cos(obs.aoa)])
        sq += obs.weight * float(n @ (point - obs.anchor)) ** 2
    residual = math.sqrt(sq / total_weight)
    eigvals = np.linalg.eigvalsh(normal)
    condition = float(eigvals[-1] / eigvals[0]) if eigvals[0] > 0 else math.inf
    return PositionEstimate(point, residual, condition)


def extract_tx_path(snapshots: Mapping[int, object], grid: Grid, stop: StoppingRule,
                    *, cyclic_rounds: int = 3):
    """Minimum-delay path extracted from the first raw (undifferenced) slot.

    The static channel dominates the raw measurement, so this path is read
    as the transmitter's direct sightline; its gain doubles as a confidence
    proxy for the bearing.
    """
    t0 = min(snapshots)
    paths = extract({t0: snapshots[t0]}, grid, stop, cyclic_rounds)
    if not paths:
        raise ExtractionError("no paths extracted from the raw snapshot")
    return min(paths, key=lambda p: p.delay)


def extract_tx_aoa(snapshots: Mapping[int, object], grid: Grid, stop: StoppingRule,
                   *, cyclic_rounds: int = 3) -> float:
    """Bearing of the transmitter's direct path, taken from the first raw slot."""
    return float(extract_tx_path(snapshots, grid, stop,
                                 cyclic_rounds=cyclic_rounds).aoa)
