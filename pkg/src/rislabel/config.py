"""Experiment configuration: defaults, JSON/TOML ingestion, manifest echo.

The published experiment never fixes exact wall or anchor coordinates, so
the default scene is a 20 m x 12 m rectangle with the transmitter near the
left wall and two surfaces mounted just inside the top and bottom walls;
all of it is configuration, not ground truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import RadioConfig, RxArray, Scene, desk_radio, paper_radio, triangular_array
from .errors import ConfigurationError
from .flipping import PhaseSchedule, make_schedule, schedule_from_table
from .scene import FloorPlan, RisAnchor, rectangle_plan

try:
    import tomllib as _toml
except ModuleNotFoundError:  # Python < 3.11
    import tomli as _toml

DESK = "desk"
PAPER = "paper"

# Reference receiver positions used by the trend experiments: one adjacent
# to each surface.
POINT_A = (6.0, 10.0)
POINT_B = (14.0, 2.0)


@dataclass(frozen=True)
class EstimatorSettings:
    max_paths: int = 16
    min_gain_ratio: float = 1e-3
    residual_factor: float = 1.5
    cyclic_rounds: int = 3
    newton_steps: int = 6
    aoa_oversample: int = 4
    delay_oversample: int = 4
    delay_max_s: float | None = None
    weight_by_beta: bool = False


@dataclass(frozen=True)
class GridSpec:
    """Rectangular sweep of receiver positions, row-major over (y, x)."""

    x0: float
    x1: float
    nx: int
    y0: float
    y1: float
    ny: int

    @classmethod
    def cover(cls, bounds, spacing: float = 0.5, margin: float = 1.0) -> "GridSpec":
        """Grid covering a floorplan at roughly `spacing` meters, inset by `margin`."""
        xmin, ymin, xmax, ymax = bounds
        x0, x1 = xmin + margin, xmax - margin
        y0, y1 = ymin + margin, ymax - margin
        if not (x1 > x0 and y1 > y0):
            raise ConfigurationError("margin leaves no room for sweep positions")
        nx = max(2, int(round((x1 - x0) / spacing)) + 1)
        ny = max(2, int(round((y1 - y0) / spacing)) + 1)
        return cls(x0, x1, nx, y0, y1, ny)

    def positions(self) -> list[tuple[float, float]]:
        xs = np.linspace(self.x0, self.x1, self.nx)
        ys = np.linspace(self.y0, self.y1, self.ny)
        return [(float(x), float(y)) for y in ys for x in xs]


@dataclass(frozen=True)
class ExperimentConfig:
    scene: Scene
    radio: RadioConfig
    schedule: PhaseSchedule
    estimator: EstimatorSettings = field(default_factory=EstimatorSettings)
    positions: tuple[tuple[float, float], ...] = ()
    grid: GridSpec | None = None
    trials: int = 100
    master_seed: int = 20240601
    max_reflections: int = 3
    localize: bool = True
    profile: str = DESK

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        if self.grid is not None:
            xmin, ymin, xmax, ymax = self.scene.plan.bounds
            if not (xmin < self.grid.x0 <= self.grid.x1 < xmax
                    and ymin < self.grid.y0 <= self.grid.y1 < ymax):
                raise ConfigurationError("sweep grid must lie strictly inside the floorplan")

    def sweep_positions(self) -> list[tuple[float, float]]:
        if self.grid is not None:
            return self.grid.positions()
        if self.positions:
            return [tuple(p) for p in self.positions]
        return [tuple(self.scene.rx)]

    def delay_max(self) -> float:
        if self.estimator.delay_max_s is not None:
            return self.estimator.delay_max_s
        xmin, ymin, xmax, ymax = self.scene.plan.bounds
        diagonal = math.hypot(xmax - xmin, ymax - ymin)
        return 2.0 * diagonal / 299_792_458.0


def default_scene(rx=(10.0, 6.0)) -> Scene:
    """20 m x 12 m room, transmitter near the left wall, one surface on the
    top wall facing down and one on the right wall facing left.  Orientations
    put each surface's specular lobe (for the fixed transmitter) inside the
    room, so each covers a usable service area."""
    plan = rectangle_plan(20.0, 12.0)
    anchors = (
        RisAnchor(position=(7.0, 11.9), orientation=1.5 * math.pi, subsurface_count=10),
        RisAnchor(position=(19.9, 3.0), orientation=math.pi, subsurface_count=10),
    )
    return Scene(plan=plan, tx=(2.0, 6.0), anchors=anchors, rx=rx,
                 rx_array=triangular_array())


def default_config(profile: str = DESK, mode: str = "single", slots: int = 9,
                   rx=(10.0, 6.0)) -> ExperimentConfig:
    scene = default_scene(rx)
    if profile == DESK:
        radio = desk_radio()
        trials = 100
    elif profile == PAPER:
        radio = paper_radio()
        trials = 1000
    else:
        raise ConfigurationError(f"unknown profile: {profile!r}")
    schedule = make_schedule(mode, scene.ris_count, slots)
    return ExperimentConfig(scene=scene, radio=radio, schedule=schedule,
                            trials=trials, profile=profile)


def _scene_from_dict(d: dict) -> Scene:
    if "walls" in d:
        plan = FloorPlan(walls=np.asarray(d["walls"], dtype=float), bounds=tuple(d["bounds"]))
    else:
        xmin, ymin, xmax, ymax = d["bounds"]
        plan = rectangle_plan(xmax - xmin, ymax - ymin, origin=(xmin, ymin))
    anchors = tuple(
        RisAnchor(position=a["position"],
                  orientation=float(a.get("orientation_rad", 0.0)),
                  subsurface_count=int(a.get("subsurfaces", 10)),
                  element_spacing=float(a.get("element_spacing", 1.0)))
        for a in d.get("ris", []))
    arr = d.get("rx_array", {})
    kind = arr.get("kind", "triangle")
    if kind == "triangle":
        rx_array = triangular_array(side_wavelengths=float(arr.get("side_wavelengths", 0.5)),
                                    orientation=float(arr.get("orientation_rad", 0.0)))
    elif kind == "custom":
        rx_array = RxArray(np.asarray(arr["element_positions"], dtype=float),
                           orientation=float(arr.get("orientation_rad", 0.0)))
    else:
        raise ConfigurationError(f"unknown rx_array kind: {kind!r}")
    return Scene(plan=plan, tx=d["tx"], anchors=anchors,
                 rx=d.get("rx", (10.0, 6.0)), rx_array=rx_array)


def _radio_from_dict(d: dict, profile: str) -> RadioConfig:
    base = dict(
        carrier_hz=float(d.get("carrier_hz", 3.5e9)),
        bandwidth_hz=float(d.get("bandwidth_hz", 100e6)),
        subcarrier_spacing_hz=float(d.get("subcarrier_spacing_hz", 60e3)),
        tx_power_w=float(d.get("tx_power_w", 1e-3)),
        noise_level=float(d.get("noise_level", 1e-7)),
    )
    if "subcarrier_indices" in d:
        return RadioConfig(subcarrier_indices=np.asarray(d["subcarrier_indices"], int), **base)
    if profile == PAPER:
        return paper_radio(**base)
    return desk_radio(int(d.get("subcarrier_count", 128)), **base)


def _schedule_from_dict(d: dict, ris_count: int) -> PhaseSchedule:
    mode = d.get("mode", "single")
    if "table" in d:
        return schedule_from_table(mode, d["table"])
    return make_schedule(mode, ris_count, int(d.get("slots", 9)),
                         base_phases=d.get("base_phases"))


def config_from_dict(raw: dict) -> ExperimentConfig:
    exp = raw.get("experiment", {})
    profile = raw.get("profile", exp.get("profile", DESK))
    scene = _scene_from_dict(raw["scene"]) if "scene" in raw else default_scene()
    radio = _radio_from_dict(raw.get("radio", {}), profile)
    schedule = _schedule_from_dict(raw.get("schedule", {}), scene.ris_count)
    est_raw = raw.get("estimator", {})
    estimator = EstimatorSettings(**{k: est_raw[k] for k in est_raw})
    grid = GridSpec(**raw["experiment"]["grid"]) if exp.get("grid") else None
    positions = tuple(tuple(p) for p in exp.get("positions", []))
    return ExperimentConfig(
        scene=scene, radio=radio, schedule=schedule, estimator=estimator,
        positions=positions, grid=grid,
        trials=int(exp.get("trials", 1000 if profile == PAPER else 100)),
        master_seed=int(exp.get("master_seed", 20240601)),
        max_reflections=int(exp.get("max_reflections", 3)),
        localize=bool(exp.get("localize", True)),
        profile=profile,
    )


def load_config(path) -> ExperimentConfig:
    """Read an experiment configuration from a .json or .toml file."""
    path = Path(path)
    if path.suffix.lower() == ".toml":
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
    elif path.suffix.lower() == ".json":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    else:
        raise ConfigurationError(f"unsupported config format: {path.suffix!r}")
    return config_from_dict(raw)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """JSON-serializable echo of a resolved configuration (for run manifests)."""
    scene = cfg.scene
    return {
        "profile": cfg.profile,
        "scene": {
            "bounds": list(scene.plan.bounds),
            "walls": scene.plan.walls.tolist(),
            "tx": scene.tx.tolist(),
            "rx": scene.rx.tolist(),
            "ris": [
                {"position": a.position.tolist(), "orientation_rad": a.orientation,
                 "subsurfaces": a.subsurface_count, "element_spacing": a.element_spacing}
                for a in scene.anchors
            ],
            "rx_array": {"kind": "custom",
                         "element_positions": scene.rx_array.element_positions.tolist(),
                         "orientation_rad": scene.rx_array.orientation},
        },
        "radio": {
            "carrier_hz": cfg.radio.carrier_hz,
            "bandwidth_hz": cfg.radio.bandwidth_hz,
            "subcarrier_spacing_hz": cfg.radio.subcarrier_spacing_hz,
            "subcarrier_indices": cfg.radio.subcarrier_indices.tolist(),
            "tx_power_w": cfg.radio.tx_power_w,
            "noise_level": cfg.radio.noise_level,
        },
        "schedule": {
            "mode": cfg.schedule.mode,
            "slots": cfg.schedule.slots,
            "table": [list(row) for row in cfg.schedule.to_table()],
        },
        "estimator": {
            "max_paths": cfg.estimator.max_paths,
            "min_gain_ratio": cfg.estimator.min_gain_ratio,
            "residual_factor": cfg.estimator.residual_factor,
            "cyclic_rounds": cfg.estimator.cyclic_rounds,
            "newton_steps": cfg.estimator.newton_steps,
            "aoa_oversample": cfg.estimator.aoa_oversample,
            "delay_oversample": cfg.estimator.delay_oversample,
            "delay_max_s": cfg.estimator.delay_max_s,
            "weight_by_beta": cfg.estimator.weight_by_beta,
        },
        "experiment": {
            "positions": [list(p) for p in cfg.positions],
            "grid": None if cfg.grid is None else {
                "x0": cfg.grid.x0, "x1": cfg.grid.x1, "nx": cfg.grid.nx,
                "y0": cfg.grid.y0, "y1": cfg.grid.y1, "ny": cfg.grid.ny},
            "trials": cfg.trials,
            "master_seed": cfg.master_seed,
            "max_reflections": cfg.max_reflections,
            "localize": cfg.localize,
        },
    }


def with_overrides(cfg: ExperimentConfig, *, seed: int | None = None,
                   mode: str | None = None, slots: int | None = None,
                   profile: str | None = None) -> ExperimentConfig:
    """Apply CLI-style overrides, rebuilding the schedule/radio when needed."""
    out = cfg
    if profile is not None and profile != cfg.profile:
        radio = paper_radio() if profile == PAPER else desk_radio()
        out = replace(out, radio=radio, profile=profile,
                      trials=1000 if profile == PAPER else out.trials)
    if mode is not None or slots is not None:
        new_mode = mode if mode is not None else out.schedule.mode
        new_slots = slots if slots is not None else out.schedule.slots
        out = replace(out, schedule=make_schedule(new_mode, out.scene.ris_count, new_slots))
    if seed is not None:
        out = replace(out, master_seed=int(seed))
    return out
