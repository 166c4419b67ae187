"""Multisnapshot Newtonized orthogonal matching pursuit.

Greedy loop over differential (or raw) snapshots: pick the (bearing, delay)
grid pair with the largest summed correlation magnitude, refine it off-grid
with safeguarded Newton steps on the gain-concentrated squared-error cost,
subtract it from every slot, and cyclically re-refine all detected paths.
Gains are re-solved by least squares after every parameter update and once
jointly at the end.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .channel import RadioConfig, RxArray, atom, delay_ramp, steering_rx
from .errors import ConfigurationError, NumericalError
from .scene import wrap_angle

logger = logging.getLogger(__name__)

_TWO_PI = 2.0 * math.pi


@dataclass
class Grid:
    """Uniform coarse search grid with factorized response matrices.

    steering[:, i] and ramps[:, j] hold the per-bearing and per-delay
    response vectors, so every grid atom kron(ramps[:, j], steering[:, i])
    is available without materializing the full dictionary.
    """

    config: RadioConfig
    array: RxArray
    aoa_points: np.ndarray
    delay_points: np.ndarray
    steering: np.ndarray = field(repr=False, default=None)
    ramps: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if len(self.aoa_points) == 0 or len(self.delay_points) == 0:
            raise ConfigurationError("grid must contain at least one bearing and one delay")
        if self.steering is None:
            self.steering = np.stack(
                [steering_rx(self.array, th) for th in self.aoa_points], axis=1)
        if self.ramps is None:
            self.ramps = np.stack(
                [delay_ramp(self.config, tv) for tv in self.delay_points], axis=1)

    @classmethod
    def build(cls, config: RadioConfig, array: RxArray, delay_max: float,
              aoa_oversample: int = 4, delay_oversample: int = 4) -> "Grid":
        """Bearing step = beamwidth/oversample, delay step = 1/(oversample*bandwidth)."""
        n_aoa = max(4 * array.size, int(math.ceil(_TWO_PI * aoa_oversample * array.aperture)))
        aoas = np.linspace(0.0, _TWO_PI, n_aoa, endpoint=False)
        step = 1.0 / (delay_oversample * config.occupied_bandwidth)
        n_tau = int(math.floor(delay_max / step)) + 1
        delays = step * np.arange(n_tau)
        return cls(config, array, aoas, delays)

    @property
    def atom_norm_sq(self) -> float:
        return float(self.array.size * self.config.n_subcarriers)

    def atom(self, theta: float, tau: float) -> np.ndarray:
        return atom(self.config, self.array, theta, tau)

    def correlations(self, data: np.ndarray) -> np.ndarray:
        """Matrix of inner products <atom(i,j), data>, shape (n_delay, n_aoa)."""
        y = np.asarray(data).reshape(self.config.n_subcarriers, self.array.size)
        return self.ramps.conj().T @ y @ self.steering.conj()


@dataclass(frozen=True)
class StoppingRule:
    """When to stop extracting: path budget, absolute residual energy floor,
    and a relative floor on the detection metric versus the first detection."""

    max_paths: int = 16
    residual_threshold: float = 0.0
    min_gain_ratio: float = 1e-3

    def __post_init__(self):
        if self.max_paths < 1:
            raise ConfigurationError("max_paths must be >= 1")
        if self.residual_threshold < 0 or self.min_gain_ratio < 0:
            raise ConfigurationError("stopping thresholds must be nonnegative")


@dataclass
class ExtractedPath:
    """One detected path: off-grid (bearing, delay) and per-slot complex gains."""

    aoa: float
    delay: float
    gains: dict[int, complex]
    detection_order: int = 0


@dataclass(frozen=True)
class CoarseDetection:
    aoa: float
    delay: float
    gains: dict[int, complex]
    metric: float


class _SlotStack:
    """Snapshots stacked into one (n_slots, N) matrix for vectorized math."""

    def __init__(self, snapshots: Mapping[int, object], config: RadioConfig, array: RxArray):
        self.config = config
        self.array = array
        self.slots = sorted(int(t) for t in snapshots)
        if not self.slots:
            raise ConfigurationError("need at least one snapshot slot")
        rows = []
        for t in self.slots:
            item = snapshots[t]
            rows.append(np.asarray(getattr(item, "data", item), dtype=complex).reshape(-1))
        self.y = np.stack(rows, axis=0)
        self.y3 = self.y.reshape(len(self.slots), config.n_subcarriers, array.size)

    def energy(self) -> float:
        return float(np.vdot(self.y, self.y).real)

    def gains_of(self, path: "ExtractedPath") -> np.ndarray:
        return np.array([path.gains.get(t, 0.0) for t in self.slots], dtype=complex)

    def add_path(self, path: "ExtractedPath", v: np.ndarray, sign: float) -> None:
        self.y += sign * np.outer(self.gains_of(path), v)
        self.y3 = self.y.reshape(self.y3.shape)


def _as_stack(snapshots, config: RadioConfig, array: RxArray) -> _SlotStack:
    if isinstance(snapshots, _SlotStack):
        return snapshots
    return _SlotStack(snapshots, config, array)


def _atom_parts(config: RadioConfig, array: RxArray, theta: float, tau: float):
    """Steering/ramp vectors with first and second parameter derivatives."""
    pos = array.world_positions
    u = np.array([math.cos(theta), math.sin(theta)])
    du = np.array([-math.sin(theta), math.cos(theta)])
    phase = -_TWO_PI * (pos @ u)
    dphase = -_TWO_PI * (pos @ du)
    ddphase = -phase  # d(du)/dtheta = -u
    a = np.exp(1j * phase)
    a1 = 1j * dphase * a
    a2 = (1j * ddphase - dphase ** 2) * a
    w = _TWO_PI * config.frequencies
    b = np.exp(-1j * w * tau)
    b1 = -1j * w * b
    b2 = -(w ** 2) * b
    return a, a1, a2, b, b1, b2


def _products(stack: _SlotStack, parts):
    """Per-slot inner products <kron(bx, ax), y_t> for all derivative combos."""
    a, a1, a2, b, b1, b2 = parts
    basis = np.stack([a.conj(), a1.conj(), a2.conj()], axis=1)
    w = stack.y3 @ basis  # (T, N_s, 3)
    bc, b1c, b2c = b.conj(), b1.conj(), b2.conj()
    c = w[:, :, 0] @ bc
    d_theta = w[:, :, 1] @ bc
    d_tau = w[:, :, 0] @ b1c
    e_tt = w[:, :, 2] @ bc
    e_tu = w[:, :, 1] @ b1c
    e_uu = w[:, :, 0] @ b2c
    return c, d_theta, d_tau, e_tt, e_tu, e_uu


def _correlate_only(stack: _SlotStack, config: RadioConfig, array: RxArray,
                    theta: float, tau: float) -> np.ndarray:
    u = np.array([math.cos(theta), math.sin(theta)])
    a = np.exp(-2j * math.pi * (array.world_positions @ u))
    b = np.exp(-2j * math.pi * config.frequencies * tau)
    return (stack.y3 @ a.conj()) @ b.conj()


def coarse_detect(residuals: Mapping[int, object], grid: Grid) -> CoarseDetection:
    """Grid pair maximizing the summed correlation magnitude, with LS gains."""
    stack = _as_stack(residuals, grid.config, grid.array)
    z = stack.y3 @ grid.steering.conj()              # (T, N_s, n_aoa)
    corr = np.tensordot(grid.ramps.conj(), z, axes=(0, 1))  # (n_tau, T, n_aoa)
    total = np.abs(corr).sum(axis=1)
    i_tau, i_aoa = np.unravel_index(int(np.argmax(total)), total.shape)
    theta = float(grid.aoa_points[i_aoa])
    tau = float(grid.delay_points[i_tau])
    c = corr[i_tau, :, i_aoa] / grid.atom_norm_sq
    gains = {t: complex(c[i]) for i, t in enumerate(stack.slots)}
    return CoarseDetection(theta, tau, gains, float(total[i_tau, i_aoa]))


def fit_cost_fixed_gains(snapshots: Mapping[int, object], gains: Mapping[int, complex],
                         config: RadioConfig, array: RxArray,
                         theta: float, tau: float):
    """Squared-error cost over slots with the gains held fixed, plus its
    analytic gradient and 2x2 Hessian in (bearing, delay)."""
    stack = _as_stack(snapshots, config, array)
    alpha = np.array([gains[t] for t in stack.slots], dtype=complex)
    parts = _atom_parts(config, array, theta, tau)
    norm_sq = array.size * config.n_subcarriers
    c, d_theta, d_tau, e_tt, e_tu, e_uu = _products(stack, parts)
    cost = stack.energy() - 2.0 * float(np.vdot(alpha, c).real) \
        + float(np.vdot(alpha, alpha).real) * norm_sq
    grad = np.array([-2.0 * float(np.vdot(alpha, d_theta).real),
                     -2.0 * float(np.vdot(alpha, d_tau).real)])
    h_tt = -2.0 * float(np.vdot(alpha, e_tt).real)
    h_tu = -2.0 * float(np.vdot(alpha, e_tu).real)
    h_uu = -2.0 * float(np.vdot(alpha, e_uu).real)
    return cost, grad, np.array([[h_tt, h_tu], [h_tu, h_uu]])


def fit_cost(snapshots: Mapping[int, object], config: RadioConfig, array: RxArray,
             theta: float, tau: float) -> float:
    """Squared-error cost at the least-squares gains (gain-concentrated)."""
    stack = _as_stack(snapshots, config, array)
    c = _correlate_only(stack, config, array, theta, tau)
    norm_sq = array.size * config.n_subcarriers
    return stack.energy() - float(np.vdot(c, c).real) / norm_sq


def fit_cost_concentrated(snapshots: Mapping[int, object], config: RadioConfig,
                          array: RxArray, theta: float, tau: float):
    """Gain-concentrated cost with analytic gradient and 2x2 Hessian.

    The gradient equals the fixed-gain gradient evaluated at the
    least-squares gains; the Hessian additionally carries the gain response,
    which keeps the delay curvature at bandwidth scale instead of carrier
    scale and makes Newton steps usable.
    """
    stack = _as_stack(snapshots, config, array)
    parts = _atom_parts(config, array, theta, tau)
    norm_sq = array.size * config.n_subcarriers
    c, d_theta, d_tau, e_tt, e_tu, e_uu = _products(stack, parts)
    cost = stack.energy() - float(np.vdot(c, c).real) / norm_sq
    grad = -2.0 / norm_sq * np.array([float(np.vdot(c, d_theta).real),
                                      float(np.vdot(c, d_tau).real)])
    h_tt = float(np.vdot(c, e_tt).real) + float(np.vdot(d_theta, d_theta).real)
    h_tu = float(np.vdot(c, e_tu).real) + float(np.vdot(d_tau, d_theta).real)
    h_uu = float(np.vdot(c, e_uu).real) + float(np.vdot(d_tau, d_tau).real)
    hess = -2.0 / norm_sq * np.array([[h_tt, h_tu], [h_tu, h_uu]])
    return cost, grad, hess


def solve_gains(snapshots: Mapping[int, object], grid: Grid, theta: float,
                tau: float) -> dict[int, complex]:
    """Per-slot least-squares gain of one atom against each snapshot."""
    stack = _as_stack(snapshots, grid.config, grid.array)
    c = _correlate_only(stack, grid.config, grid.array, theta, tau) / grid.atom_norm_sq
    return {t: complex(c[i]) for i, t in enumerate(stack.slots)}


def refine_newton(estimate: ExtractedPath, snapshots: Mapping[int, object], grid: Grid,
                  *, max_steps: int = 6, delay_bounds: tuple[float, float] | None = None
                  ) -> ExtractedPath:
    """Safeguarded Newton refinement of one path against slots that still
    contain it.

    Ascent steps are rejected by backtracking; a non-positive-definite
    Hessian falls back to a backtracked gradient step.  The returned cost
    (at re-solved least-squares gains) never exceeds the input cost.
    """
    if not (math.isfinite(estimate.aoa) and math.isfinite(estimate.delay)):
        raise NumericalError("refinement requires finite starting parameters")
    config, array = grid.config, grid.array
    stack = _as_stack(snapshots, config, array)
    theta, tau = float(estimate.aoa), float(estimate.delay)
    if delay_bounds is None:
        delay_bounds = (0.0, float(grid.delay_points[-1]) * 1.5 + 2.0 / config.occupied_bandwidth)
    tau_scale = 1.0 / config.occupied_bandwidth
    grad_floor = 1e-12 * max(stack.energy(), 1e-300)

    def clamp(candidate_tau):
        return min(max(candidate_tau, delay_bounds[0]), delay_bounds[1])

    cost, grad, hess = fit_cost_concentrated(stack, config, array, theta, tau)
    if not np.isfinite(cost):
        raise NumericalError("non-finite refinement cost")
    for it in range(max_steps):
        g_s = np.array([grad[0], grad[1] * tau_scale])
        h_s = np.array([[hess[0, 0], hess[0, 1] * tau_scale],
                        [hess[0, 1] * tau_scale, hess[1, 1] * tau_scale ** 2]])
        if float(np.linalg.norm(g_s)) <= grad_floor:
            break
        directions = []
        det = h_s[0, 0] * h_s[1, 1] - h_s[0, 1] ** 2
        if h_s[0, 0] > 0 and det > 0:
            directions.append(np.linalg.solve(h_s, -g_s))
        curvature = float(g_s @ (h_s @ g_s))
        if curvature > 0:
            scale = float(g_s @ g_s) / curvature
        else:
            scale = 1.0 / max(float(np.linalg.norm(h_s)), 1e-300)
        directions.append(-g_s * scale)

        accepted = None
        for step in directions:
            shrink = 1.0
            for _ in range(12):
                cand_theta = theta + step[0] * shrink
                cand_tau = clamp(tau + step[1] * tau_scale * shrink)
                cand_cost = fit_cost(stack, config, array, cand_theta, cand_tau)
                if np.isfinite(cand_cost) and cand_cost < cost:
                    accepted = (cand_theta, cand_tau, cand_cost)
                    break
                shrink *= 0.5
            if accepted:
                break
        if accepted is None:
            break
        theta, tau, cost = accepted
        if it + 1 < max_steps:
            _, grad, hess = fit_cost_concentrated(stack, config, array, theta, tau)

    theta = wrap_angle(theta)
    gains = solve_gains(stack, grid, theta, tau)
    return ExtractedPath(theta, tau, gains, estimate.detection_order)


def extract(deltas: Mapping[int, object], grid: Grid, stop: StoppingRule,
            cyclic_rounds: int = 3, *, newton_steps: int = 6,
            history: list | None = None) -> list[ExtractedPath]:
    """Greedy detect/refine/subtract loop with cyclic re-refinement.

    Each new detection gets a full Newton refinement; cyclic passes apply
    one safeguarded step per path per round and stop early once nothing
    moves.  Stops when the residual energy falls below
    stop.residual_threshold, the newest detection metric drops below
    min_gain_ratio times the first one, or max_paths is reached.  All gains
    are re-fit jointly once at the end.
    """
    stack = _as_stack(deltas, grid.config, grid.array)
    originals = stack.y.copy()
    paths: list[ExtractedPath] = []
    first_metric = None
    move_tol = 1e-10

    def record(stage: str):
        energy = stack.energy()
        logger.debug("extract %s: residual energy %.6e", stage, energy)
        if history is not None:
            history.append(energy)

    record("start")
    while len(paths) < stop.max_paths:
        if stack.energy() <= stop.residual_threshold:
            break
        det = coarse_detect(stack, grid)
        if det.metric <= 0.0:
            break
        if first_metric is None:
            first_metric = det.metric
        elif det.metric < stop.min_gain_ratio * first_metric:
            break
        cand = ExtractedPath(det.aoa, det.delay, dict(det.gains), len(paths))
        cand = refine_newton(cand, stack, grid, max_steps=newton_steps)
        stack.add_path(cand, grid.atom(cand.aoa, cand.delay), -1.0)
        paths.append(cand)
        record(f"detect {len(paths)}")
        for _ in range(cyclic_rounds):
            moved = 0.0
            for i, p in enumerate(paths):
                stack.add_path(p, grid.atom(p.aoa, p.delay), +1.0)
                refined = refine_newton(p, stack, grid, max_steps=1)
                stack.add_path(refined, grid.atom(refined.aoa, refined.delay), -1.0)
                moved = max(moved, abs(refined.aoa - p.aoa)
                            + abs(refined.delay - p.delay) * grid.config.occupied_bandwidth)
                paths[i] = refined
            if moved < move_tol:
                break
        record(f"cyclic {len(paths)}")

    if paths:
        _joint_gain_refit(originals, stack, paths, grid)
        record("joint refit")
    return paths


def _joint_gain_refit(originals: np.ndarray, stack: _SlotStack,
                      paths: list[ExtractedPath], grid: Grid) -> None:
    v = np.stack([grid.atom(p.aoa, p.delay) for p in paths], axis=1)
    coef, *_ = np.linalg.lstsq(v, originals.T, rcond=None)  # (L, T)
    for i, p in enumerate(paths):
        for j, t in enumerate(stack.slots):
            p.gains[t] = complex(coef[i, j])
    stack.y[...] = originals - (v @ coef).T
    stack.y3 = stack.y.reshape(stack.y3.shape)
