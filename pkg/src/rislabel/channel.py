"""Frequency-domain OFDM channel synthesis over traced geometric paths.

A snapshot stacks all receive antennas and subcarriers into one complex
vector: y(t) = sum_paths alpha(t) * kron(delay_ramp(tau), steering(theta)) + noise.
Paths through a reflecting surface pick up its programmable phase factor,
so their coefficients change from slot to slot while direct paths stay put.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, RejectedInputError
from .scene import FloorPlan, PathGeometry, RisAnchor, trace_paths, visibility, wrap_angle

SPEED_OF_LIGHT = 299_792_458.0
REFLECTION_LOSS_DB = 5.0


@dataclass(frozen=True)
class RadioConfig:
    """OFDM numerology and signal levels.

    Subcarrier n sits at carrier_hz + subcarrier_indices[n] * subcarrier_spacing_hz;
    all used tones must fall inside the nominal bandwidth.  noise_level is the
    standard deviation of each complex measurement entry.
    """

    carrier_hz: float = 3.5e9
    bandwidth_hz: float = 100e6
    subcarrier_spacing_hz: float = 60e3
    subcarrier_indices: np.ndarray = field(default_factory=lambda: np.arange(-64, 64))
    tx_power_w: float = 1e-3
    noise_level: float = 1e-7

    def __post_init__(self):
        idx = np.asarray(self.subcarrier_indices, dtype=int).reshape(-1)
        if idx.size < 2:
            raise ConfigurationError("need at least two subcarriers")
        if len(np.unique(idx)) != idx.size:
            raise ConfigurationError("subcarrier indices must be distinct")
        if self.tx_power_w <= 0:
            raise ConfigurationError("tx_power_w must be positive")
        if self.noise_level < 0:
            raise ConfigurationError("noise_level must be nonnegative")
        half = self.bandwidth_hz / 2.0
        offsets = idx * self.subcarrier_spacing_hz
        if np.any(np.abs(offsets) > half * (1.0 + 1e-12)):
            raise ConfigurationError("subcarrier offsets exceed the nominal bandwidth")
        object.__setattr__(self, "subcarrier_indices", idx)
        object.__setattr__(self, "_frequencies", self.carrier_hz + offsets)

    @property
    def n_subcarriers(self) -> int:
        return int(self.subcarrier_indices.size)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def frequencies(self) -> np.ndarray:
        """Absolute subcarrier frequencies (Hz)."""
        return self._frequencies

    @property
    def occupied_bandwidth(self) -> float:
        f = self._frequencies
        return float(f.max() - f.min())


def evenly_spaced_indices(count: int, half_span: int) -> np.ndarray:
    """`count` integer indices with uniform stride, centered, within +-half_span."""
    if count < 2:
        raise ConfigurationError("count must be >= 2")
    stride = max(1, (2 * half_span) // (count - 1))
    total = stride * (count - 1)
    if total > 2 * half_span:
        raise ConfigurationError("count exceeds the available index span")
    start = -(total // 2)
    return start + stride * np.arange(count)


def desk_radio(subcarrier_count: int = 128, **kwargs) -> RadioConfig:
    """Default profile: a decimated tone set, full nominal band."""
    cfg = RadioConfig(**kwargs) if kwargs else RadioConfig()
    half = int(cfg.bandwidth_hz / 2.0 / cfg.subcarrier_spacing_hz)
    return replace(cfg, subcarrier_indices=evenly_spaced_indices(subcarrier_count, half))


def paper_radio(**kwargs) -> RadioConfig:
    """Full-scale profile: every tone that fits in the nominal band."""
    cfg = RadioConfig(**kwargs) if kwargs else RadioConfig()
    half = int(cfg.bandwidth_hz / 2.0 / cfg.subcarrier_spacing_hz)
    return replace(cfg, subcarrier_indices=np.arange(-half, half + 1))


@dataclass(frozen=True)
class RxArray:
    """Receive array: element positions in wavelengths relative to the centroid."""

    element_positions: np.ndarray
    orientation: float = 0.0

    def __post_init__(self):
        pos = np.asarray(self.element_positions, dtype=float).reshape(-1, 2)
        if len(pos) < 2:
            raise ConfigurationError("need at least two receive elements")
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                if np.linalg.norm(pos[i] - pos[j]) <= 0:
                    raise ConfigurationError("receive elements must be at distinct positions")
        object.__setattr__(self, "element_positions", pos)
        c, s = math.cos(self.orientation), math.sin(self.orientation)
        rot = np.array([[c, -s], [s, c]])
        object.__setattr__(self, "_world_positions", pos @ rot.T)
        object.__setattr__(self, "_aperture", float(max(
            np.linalg.norm(pos[i] - pos[j])
            for i in range(len(pos)) for j in range(i + 1, len(pos)))))

    @property
    def size(self) -> int:
        return len(self.element_positions)

    @property
    def world_positions(self) -> np.ndarray:
        """Element positions rotated by the array orientation."""
        return self._world_positions

    @property
    def aperture(self) -> float:
        """Largest pairwise element distance (wavelengths)."""
        return self._aperture


def triangular_array(side_wavelengths: float = 0.5, orientation: float = 0.0) -> RxArray:
    """Equilateral triangle centered on its centroid; resolves bearings over 360 deg."""
    r = side_wavelengths / math.sqrt(3.0)
    angles = np.array([0.5, 0.5 + 2.0 / 3.0, 0.5 + 4.0 / 3.0]) * math.pi
    pos = r * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return RxArray(pos, orientation)


def steering_rx(array: RxArray, theta: float) -> np.ndarray:
    """Array response for a wave arriving from bearing theta; unit-modulus entries."""
    u = np.array([math.cos(theta), math.sin(theta)])
    return np.exp(-2j * math.pi * (array.world_positions @ u))


def delay_ramp(config: RadioConfig, tau: float) -> np.ndarray:
    """Per-subcarrier phase ramp exp(-j*2*pi*f_n*tau) for a propagation delay tau."""
    if tau < 0:
        raise RejectedInputError("delay must be nonnegative")
    return np.exp(-2j * math.pi * tau * config.frequencies)


def atom(config: RadioConfig, array: RxArray, theta: float, tau: float) -> np.ndarray:
    """Stacked response kron(delay_ramp, steering); squared norm = N_R * N_s."""
    return np.multiply.outer(delay_ramp(config, tau), steering_rx(array, theta)).ravel()


def dictionary(config: RadioConfig, array: RxArray, thetas, taus) -> np.ndarray:
    """Column-stacked atoms for paired (theta, tau) parameter lists."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    a = np.stack([steering_rx(array, th) for th in thetas], axis=1)
    b = np.stack([delay_ramp(config, tv) for tv in taus], axis=1)
    return np.einsum("nl,rl->nrl", b, a).reshape(-1, len(thetas))


def _subsurface_response(anchor: RisAnchor, bearing: float) -> np.ndarray:
    """Per-subsurface phase response of the anchor's uniform linear array."""
    m = np.arange(anchor.subsurface_count)
    return math.pi * anchor.element_spacing * m * math.sin(bearing - anchor.orientation)


def ris_coefficient(anchor: RisAnchor, incident: float, reflect: float,
                    surface_phases) -> complex:
    """Sum over subsurfaces of exp(j*(response_in + phase + response_out)).

    `incident` and `reflect` are world-frame bearings; the anchor's
    orientation defines broadside.  Magnitude is at most subsurface_count.
    """
    phases = np.asarray(surface_phases, dtype=float).reshape(-1)
    if phases.size != anchor.subsurface_count:
        raise ConfigurationError("surface phase vector length must equal subsurface_count")
    total = _subsurface_response(anchor, incident) + phases + _subsurface_response(anchor, reflect)
    return complex(np.sum(np.exp(1j * total)))


def ris_array_factor(anchor: RisAnchor, incident: float, reflect: float) -> complex:
    """Phase-independent part of the surface coefficient (all surface phases zero)."""
    return ris_coefficient(anchor, incident, reflect, np.zeros(anchor.subsurface_count))


def free_space_amplitude(config: RadioConfig, distance: float) -> float:
    if distance <= 0:
        raise RejectedInputError("propagation distance must be positive")
    return config.wavelength / (4.0 * math.pi * distance)


def path_gain(config: RadioConfig, geometry: PathGeometry) -> complex:
    """Free-space amplitude with a fixed dB loss per bounce; phase from path length."""
    d = geometry.total_length
    amp = free_space_amplitude(config, d)
    amp *= 10.0 ** (-REFLECTION_LOSS_DB * geometry.reflection_count / 20.0)
    return amp * np.exp(-2j * math.pi * d / config.wavelength)


@dataclass(frozen=True)
class PropagationPath:
    """One path's synthesis parameters.

    ris_tag: 0 for a direct (transmitter-to-receiver) path, otherwise the
    1-based index of the surface the path crosses.  incident_angle and
    reflect_angle are the world-frame bearings at the surface and exist only
    for tagged paths.
    """

    ris_tag: int
    gain: complex
    aoa: float
    delay: float
    reflection_count: int = 0
    incident_angle: float | None = None
    reflect_angle: float | None = None

    def __post_init__(self):
        if self.delay <= 0:
            raise RejectedInputError("path delay must be positive")
        if abs(self.gain) <= 0:
            raise RejectedInputError("path gain must be nonzero")
        has_ris_fields = self.incident_angle is not None and self.reflect_angle is not None
        if (self.ris_tag >= 1) != has_ris_fields:
            raise RejectedInputError("incident/reflect angles present iff the path is tagged")


@dataclass(frozen=True)
class Scene:
    """Static world: floorplan, transmitter, labeling surfaces, receiver."""

    plan: FloorPlan
    tx: np.ndarray
    anchors: tuple[RisAnchor, ...]
    rx: np.ndarray
    rx_array: RxArray

    def __post_init__(self):
        object.__setattr__(self, "tx", np.asarray(self.tx, dtype=float).reshape(2))
        object.__setattr__(self, "rx", np.asarray(self.rx, dtype=float).reshape(2))
        object.__setattr__(self, "anchors", tuple(self.anchors))
        for point in (self.tx, self.rx, *(a.position for a in self.anchors)):
            if not self.plan.contains(point):
                raise ConfigurationError("all scene anchors must lie inside the floorplan bounds")

    @property
    def ris_count(self) -> int:
        return len(self.anchors)


def build_propagation_paths(scene: Scene, config: RadioConfig,
                            max_reflections: int = 3) -> list[PropagationPath]:
    """Trace the scene and attach gains/angles/delays to every usable path.

    Direct paths use up to `max_reflections` bounces.  Tagged paths combine
    the one direct transmitter-to-surface leg with each traced
    surface-to-receiver path; blocked feeds yield no tagged paths.
    """
    paths = []
    for geom in trace_paths(scene.plan, scene.tx, scene.rx, max_reflections):
        paths.append(PropagationPath(
            ris_tag=0,
            gain=path_gain(config, geom),
            aoa=geom.arrival_angle,
            delay=geom.total_length / SPEED_OF_LIGHT,
            reflection_count=geom.reflection_count,
        ))
    for k, anchor in enumerate(scene.anchors, start=1):
        if not visibility(scene.plan, scene.tx, anchor.position):
            continue
        feed = scene.tx - anchor.position
        d_feed = float(np.linalg.norm(feed))
        gain_feed = free_space_amplitude(config, d_feed) * np.exp(
            -2j * math.pi * d_feed / config.wavelength)
        incident = wrap_angle(math.atan2(feed[1], feed[0]))
        # The panel shadows the wall it is mounted against out to its own extent.
        clearance = max(0.3, anchor.subsurface_count * anchor.element_spacing
                        * config.wavelength / 2.0)
        for geom in trace_paths(scene.plan, anchor.position, scene.rx, max_reflections,
                                source_clearance=clearance):
            paths.append(PropagationPath(
                ris_tag=k,
                gain=complex(gain_feed * path_gain(config, geom)),
                aoa=geom.arrival_angle,
                delay=(d_feed + geom.total_length) / SPEED_OF_LIGHT,
                reflection_count=geom.reflection_count,
                incident_angle=incident,
                reflect_angle=geom.departure_angle,
            ))
    paths.sort(key=lambda p: (p.ris_tag, p.delay, p.aoa))
    return paths


def path_alpha(path: PropagationPath, anchors: tuple[RisAnchor, ...], schedule,
               t: int) -> complex:
    """Slot-t coefficient: the raw gain for direct paths, gain times the
    surface coefficient (evaluated at that slot's surface phases) otherwise."""
    if path.ris_tag == 0:
        return complex(path.gain)
    anchor = anchors[path.ris_tag - 1]
    phi = schedule.phase(path.ris_tag, t)
    phases = np.full(anchor.subsurface_count, phi)
    return complex(path.gain * ris_coefficient(
        anchor, path.incident_angle, path.reflect_angle, phases))


def path_beta(path: PropagationPath, anchors: tuple[RisAnchor, ...]) -> complex:
    """Slot-independent coefficient: gain times the phase-free array factor."""
    if path.ris_tag == 0:
        return complex(path.gain)
    anchor = anchors[path.ris_tag - 1]
    return complex(path.gain * ris_array_factor(
        anchor, path.incident_angle, path.reflect_angle))


@dataclass(frozen=True)
class CsiSnapshot:
    """Stacked complex measurement for one slot; length N_R * N_s."""

    t: int
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(data)):
            raise RejectedInputError("snapshot entries must be finite")
        object.__setattr__(self, "data", data)


def _noise_rng(seed, t: int) -> np.random.Generator:
    parts = list(seed) if isinstance(seed, (tuple, list)) else [int(seed)]
    return np.random.default_rng(np.random.SeedSequence(parts + [int(t)]))


def noise_vector(config: RadioConfig, n_rx: int, t: int, seed) -> np.ndarray:
    """Circular complex Gaussian noise; E|w_i|^2 = noise_level^2, keyed by (seed, t)."""
    n = n_rx * config.n_subcarriers
    rng = _noise_rng(seed, t)
    scale = config.noise_level / math.sqrt(2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def synthesize_snapshot(scene: Scene, config: RadioConfig, schedule, t: int, seed,
                        *, paths: list[PropagationPath] | None = None,
                        max_reflections: int = 3) -> CsiSnapshot:
    """One slot's measurement over the scene under the given phase schedule."""
    if paths is None:
        paths = build_propagation_paths(scene, config, max_reflections)
    y = np.zeros(scene.rx_array.size * config.n_subcarriers, dtype=complex)
    if paths:
        v = dictionary(config, scene.rx_array, [p.aoa for p in paths], [p.delay for p in paths])
        alphas = np.array([path_alpha(p, scene.anchors, schedule, t) for p in paths])
        y = v @ alphas
    y = y + noise_vector(config, scene.rx_array.size, t, seed)
    return CsiSnapshot(t, y)


def synthesize_snapshots(scene: Scene, config: RadioConfig, schedule, seed,
                         *, paths: list[PropagationPath] | None = None,
                         max_reflections: int = 3) -> dict[int, CsiSnapshot]:
    """All slots 1..schedule.slots, sharing one traced path set and dictionary."""
    if paths is None:
        paths = build_propagation_paths(scene, config, max_reflections)
    n = scene.rx_array.size * config.n_subcarriers
    v = None
    if paths:
        v = dictionary(config, scene.rx_array, [p.aoa for p in paths], [p.delay for p in paths])
    out = {}
    for t in range(1, schedule.slots + 1):
        if v is None:
            y = np.zeros(n, dtype=complex)
        else:
            alphas = np.array([path_alpha(p, scene.anchors, schedule, t) for p in paths])
            y = v @ alphas
        out[t] = CsiSnapshot(t, y + noise_vector(config, scene.rx_array.size, t, seed))
    return out


def measured_snr_db(scene: Scene, config: RadioConfig, schedule, t: int = 1,
                    *, paths: list[PropagationPath] | None = None) -> float:
    """Aggregate SNR of one noiseless slot against the configured noise energy."""
    quiet = replace(config, noise_level=0.0)
    snap = synthesize_snapshot(scene, quiet, schedule, t, seed=0, paths=paths)
    signal = float(np.vdot(snap.data, snap.data).real)
    noise = config.noise_level ** 2 * snap.data.size
    if noise == 0:
        return math.inf
    return 10.0 * math.log10(signal / noise)
