"""Monte Carlo experiment driver: trials, error metrics, sweeps, CSV export.

Every trial is fully determined by (master seed, position index, trial
index): noise streams are derived from that key, so any subset of a sweep
can be recomputed in isolation and sweeps are byte-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .association import LabeledPath, associate, estimate_beta, select_los
from .channel import build_propagation_paths, synthesize_snapshots
from .config import ExperimentConfig
from .errors import (ConfigurationError, DegenerateGeometryError, ExtractionError,
                     RejectedInputError)
from .flipping import SINGLE, delta
from .localize import BearingObservation, extract_tx_path, triangulate
from .mnomp import Grid, StoppingRule, extract
from .scene import wrap_angle


def absolute_angle_error(a: float, b: float) -> float:
    """|a - b| wrapped onto [0, pi]."""
    d = wrap_angle(a - b)
    return min(d, 2.0 * math.pi - d)


@dataclass
class TrialRecord:
    """Per-trial outcome: true/estimated bearings per surface, wrapped
    absolute bearing errors (worst-case pi when nothing was found), and the
    localization error in meters (NaN when no fix was possible)."""

    position: tuple[float, float]
    trial_index: int
    true_aoa: dict[int, float]
    est_aoa: dict[int, float | None]
    aoa_error: dict[int, float]
    found: dict[int, bool]
    tx_aoa_est: float | None = None
    loc_estimate: tuple[float, float] | None = None
    loc_error: float = math.nan


def _noise_energy(config, n_rx: int, slots: int, doubled: bool) -> float:
    per_entry = config.noise_level ** 2 * (2.0 if doubled else 1.0)
    return per_entry * n_rx * config.n_subcarriers * slots


def build_grid(cfg: ExperimentConfig) -> Grid:
    return Grid.build(cfg.radio, cfg.scene.rx_array, cfg.delay_max(),
                      cfg.estimator.aoa_oversample, cfg.estimator.delay_oversample)


def _stopping(cfg: ExperimentConfig, slots: int, doubled: bool) -> StoppingRule:
    energy = _noise_energy(cfg.radio, cfg.scene.rx_array.size, slots, doubled)
    return StoppingRule(max_paths=cfg.estimator.max_paths,
                        residual_threshold=cfg.estimator.residual_factor * energy,
                        min_gain_ratio=cfg.estimator.min_gain_ratio)


def extract_and_label(cfg: ExperimentConfig, deltas, grid: Grid) -> list[LabeledPath]:
    """Run the estimator per the configured mode and attach surface labels."""
    schedule = cfg.schedule
    rounds = cfg.estimator.cyclic_rounds
    steps = cfg.estimator.newton_steps
    if schedule.mode == SINGLE:
        labeled: list[LabeledPath] = []
        for k in range(1, schedule.ris_count + 1):
            slots = [t for t in schedule.active_slots(k) if t in deltas]
            if not slots:
                continue
            sub = {t: deltas[t] for t in slots}
            paths = extract(sub, grid, _stopping(cfg, len(slots), doubled=True),
                            rounds, newton_steps=steps)
            group = [LabeledPath(p, k, estimate_beta(p, schedule, k)) for p in paths]
            if group:
                group[select_los(group)].is_los = True
            labeled.extend(group)
        return labeled
    paths = extract(deltas, grid, _stopping(cfg, len(deltas), doubled=True),
                    rounds, newton_steps=steps)
    return associate(paths, schedule)


def run_trial(cfg: ExperimentConfig, position, trial_seed, *,
              grid: Grid | None = None, paths=None) -> TrialRecord:
    """Synthesize, difference, extract, associate, select, triangulate.

    trial_seed is an int or tuple of ints; together with the slot index it
    keys every noise draw, so identical seeds give identical records.
    `grid` and `paths` may be precomputed (they depend only on the
    configuration and the position) and are rebuilt here when omitted.
    """
    scene = replace(cfg.scene, rx=np.asarray(position, dtype=float))
    seed = tuple(trial_seed) if isinstance(trial_seed, (tuple, list)) else (int(trial_seed),)
    trial_index = seed[-1] if len(seed) > 1 else 0

    snaps = synthesize_snapshots(scene, cfg.radio, cfg.schedule, seed, paths=paths,
                                 max_reflections=cfg.max_reflections)
    deltas = {t: delta(snaps[t], snaps[1], cfg.schedule)
              for t in range(2, cfg.schedule.slots + 1)}
    if grid is None:
        grid = build_grid(cfg)
    labeled = extract_and_label(cfg, deltas, grid)

    true_aoa, est_aoa, err, found = {}, {}, {}, {}
    for k, anchor in enumerate(scene.anchors, start=1):
        bearing = math.atan2(anchor.position[1] - scene.rx[1],
                             anchor.position[0] - scene.rx[0])
        true_aoa[k] = wrap_angle(bearing)
        los = [lp for lp in labeled if lp.ris_id == k and lp.is_los]
        if los:
            est_aoa[k] = float(los[0].base.aoa)
            err[k] = absolute_angle_error(true_aoa[k], est_aoa[k])
            found[k] = True
        else:
            est_aoa[k] = None
            err[k] = math.pi
            found[k] = False

    record = TrialRecord(position=(float(position[0]), float(position[1])),
                         trial_index=int(trial_index), true_aoa=true_aoa,
                         est_aoa=est_aoa, aoa_error=err, found=found)
    if cfg.localize:
        _localize_trial(cfg, scene, snaps, grid, labeled, record)
    return record


def _localize_trial(cfg, scene, snaps, grid, labeled, record) -> None:
    try:
        tx_path = extract_tx_path(snaps, grid, _stopping(cfg, 1, doubled=False),
                                  cyclic_rounds=cfg.estimator.cyclic_rounds)
    except ExtractionError:
        return
    record.tx_aoa_est = float(tx_path.aoa)
    weighted = cfg.estimator.weight_by_beta
    # Confidence weights share units: the direct path's gain for the
    # transmitter, |beta| for each surface sightline.
    tx_weight = max(abs(g) for g in tx_path.gains.values()) if weighted else 1.0
    observations = [BearingObservation(scene.tx, record.tx_aoa_est,
                                       max(tx_weight, 1e-300))]
    for k, anchor in enumerate(scene.anchors, start=1):
        if record.est_aoa.get(k) is None:
            continue
        weight = 1.0
        if weighted:
            betas = [abs(lp.beta) for lp in labeled if lp.ris_id == k and lp.is_los]
            weight = max(betas[0], 1e-300) if betas else 1.0
        observations.append(BearingObservation(anchor.position, record.est_aoa[k], weight))
    if len(observations) < 2:
        return
    try:
        estimate = triangulate(observations)
    except DegenerateGeometryError:
        return
    record.loc_estimate = (float(estimate.point[0]), float(estimate.point[1]))
    record.loc_error = float(np.linalg.norm(estimate.point - scene.rx))


def trial_seed_key(master_seed: int, position_index: int, trial_index: int) -> tuple[int, ...]:
    return (int(master_seed), int(position_index), int(trial_index))


def run_position(cfg: ExperimentConfig, position, position_index: int,
                 *, grid: Grid | None = None) -> list[TrialRecord]:
    """All trials at one position, sharing the traced path set and grid."""
    if grid is None:
        grid = build_grid(cfg)
    scene = replace(cfg.scene, rx=np.asarray(position, dtype=float))
    paths = build_propagation_paths(scene, cfg.radio, cfg.max_reflections)
    return [run_trial(cfg, position, trial_seed_key(cfg.master_seed, position_index, j),
                      grid=grid, paths=paths)
            for j in range(cfg.trials)]


def mae(records: list[TrialRecord]) -> dict[int, float]:
    """Per-surface mean absolute bearing error, in degrees."""
    if not records:
        raise RejectedInputError("mae needs at least one record")
    out = {}
    for k in sorted(records[0].aoa_error):
        out[k] = math.degrees(float(np.mean([r.aoa_error[k] for r in records])))
    return out


def mae_localization(records: list[TrialRecord]) -> float:
    """Mean localization error (m) over trials that produced a fix; NaN if none did."""
    vals = [r.loc_error for r in records if math.isfinite(r.loc_error)]
    return float(np.mean(vals)) if vals else math.nan


def _metric_values(records: list[TrialRecord], metric) -> list[float]:
    if callable(metric):
        return [float(metric(r)) for r in records]
    if metric == "loc_error":
        return [float(r.loc_error) for r in records]
    if metric.startswith("aoa_error"):
        _, _, ris = metric.partition(":")
        k = int(ris) if ris else 1
        return [float(r.aoa_error[k]) for r in records]
    raise ConfigurationError(f"unknown metric: {metric!r}")


def cdf(records: list[TrialRecord], metric) -> list[tuple[float, float]]:
    """Empirical CDF of a per-trial metric: sorted (value, fraction <= value)."""
    values = _metric_values(records, metric)
    if not values:
        raise RejectedInputError("cdf needs at least one record")
    values.sort()
    n = len(values)
    return [(values[i], (i + 1) / n) for i in range(n)]


def sweep(cfg: ExperimentConfig) -> list[dict]:
    """Aggregate trials over every sweep position into one row per position."""
    rows = []
    grid = build_grid(cfg)
    for idx, pos in enumerate(cfg.sweep_positions()):
        records = run_position(cfg, pos, idx, grid=grid)
        row = {"x": pos[0], "y": pos[1], "trials": cfg.trials}
        for k, value in mae(records).items():
            row[f"mae_aoa_ris{k}_deg"] = value
        for k in sorted(records[0].found):
            row[f"found_rate_ris{k}"] = float(np.mean([r.found[k] for r in records]))
        row["mae_loc_m"] = mae_localization(records)
        rows.append(row)
    return rows


def format_float(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(x, ".12g")


def write_csv(rows: list[dict], path, columns: list[str] | None = None) -> None:
    """Plain CSV with deterministic float formatting and '\\n' newlines."""
    if not rows:
        raise RejectedInputError("nothing to write")
    if columns is None:
        columns = list(rows[0].keys())
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for c in columns:
            v = row[c]
            cells.append(format_float(v) if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
