"""2D floorplan geometry and image-source reflection path tracing.

Walls are ideal specular reflectors given as 2D segments.  Reflection paths
are found with the image-source method: the source is mirrored across a
candidate wall sequence, bounce points are recovered by intersecting the
unfolded straight line with each wall, and every leg is checked for
occlusion.  Angles are radians in the world frame, distances in meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import RejectedInputError

# Absolute tolerance (meters) for point-on-line tests.
_ON_LINE_EPS = 1e-9
# Relative tolerance for strict-interior parameter tests along a segment.
_PARAM_EPS = 1e-9


def wrap_angle(angle: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    return float(angle) % (2.0 * math.pi)


@dataclass(frozen=True)
class FloorPlan:
    """Wall segments inside an axis-aligned boundary rectangle.

    walls: array of shape (W, 2, 2) -- [wall, endpoint, xy] in meters.
    bounds: (xmin, ymin, xmax, ymax).
    """

    walls: np.ndarray
    bounds: tuple[float, float, float, float]

    def __post_init__(self):
        walls = np.asarray(self.walls, dtype=float).reshape(-1, 2, 2)
        lengths = np.linalg.norm(walls[:, 1] - walls[:, 0], axis=1) if len(walls) else np.empty(0)
        if len(walls) and np.any(lengths <= _ON_LINE_EPS):
            raise RejectedInputError("every wall segment must have nonzero length")
        xmin, ymin, xmax, ymax = (float(v) for v in self.bounds)
        if not (xmax > xmin and ymax > ymin):
            raise RejectedInputError("bounds rectangle must have positive area")
        object.__setattr__(self, "walls", walls)
        object.__setattr__(self, "bounds", (xmin, ymin, xmax, ymax))

    @property
    def wall_count(self) -> int:
        return len(self.walls)

    def contains(self, point) -> bool:
        x, y = float(point[0]), float(point[1])
        xmin, ymin, xmax, ymax = self.bounds
        return xmin <= x <= xmax and ymin <= y <= ymax


def rectangle_plan(width: float, height: float, origin=(0.0, 0.0)) -> FloorPlan:
    """Four-wall rectangular room with the lower-left corner at `origin`."""
    x0, y0 = float(origin[0]), float(origin[1])
    x1, y1 = x0 + float(width), y0 + float(height)
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    walls = [[corners[i], corners[(i + 1) % 4]] for i in range(4)]
    return FloorPlan(walls=np.array(walls), bounds=(x0, y0, x1, y1))


@dataclass(frozen=True)
class RisAnchor:
    """A wall-mounted reflecting surface: a uniform linear array of subsurfaces.

    position: 2D point (m); orientation: boresight bearing (rad);
    subsurface_count: number of elements; element_spacing: spacing as a
    multiple of half a wavelength.
    """

    position: np.ndarray
    orientation: float
    subsurface_count: int = 10
    element_spacing: float = 1.0

    def __post_init__(self):
        if self.subsurface_count < 1:
            raise RejectedInputError("subsurface_count must be >= 1")
        if self.element_spacing <= 0:
            raise RejectedInputError("element_spacing must be positive")
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(2))
        object.__setattr__(self, "orientation", wrap_angle(self.orientation))


@dataclass(frozen=True)
class PathGeometry:
    """One propagation path from source to sink.

    vertices: (n, 2) ordered points, vertices[0] = source, vertices[-1] = sink;
    departure_angle: bearing of the first leg seen from the source;
    arrival_angle: bearing from the sink back along the final leg (i.e.
    toward the last scatterer, or toward the source for a direct path).
    """

    vertices: np.ndarray
    total_length: float
    reflection_count: int
    departure_angle: float
    arrival_angle: float

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=float).reshape(-1, 2))


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _segment_params(a, b, p, q):
    """Intersection parameters (t on a-b, u on p-q) of two segment-supporting lines.

    Returns None for (near-)parallel lines.
    """
    rx, ry = b[0] - a[0], b[1] - a[1]
    sx, sy = q[0] - p[0], q[1] - p[1]
    denom = _cross(rx, ry, sx, sy)
    scale = math.hypot(rx, ry) * math.hypot(sx, sy)
    if abs(denom) <= 1e-14 * max(scale, 1e-300):
        return None
    apx, apy = p[0] - a[0], p[1] - a[1]
    t = _cross(apx, apy, sx, sy) / denom
    u = _cross(apx, apy, rx, ry) / denom
    return t, u


def _point_line_distance(point, p, q):
    d = q - p
    length = math.hypot(d[0], d[1])
    return abs(_cross(d[0], d[1], point[0] - p[0], point[1] - p[1])) / length


def _point_on_segment(point, p, q) -> bool:
    if _point_line_distance(point, p, q) > _ON_LINE_EPS:
        return False
    d = q - p
    s = float(np.dot(point - p, d) / np.dot(d, d))
    return -_PARAM_EPS <= s <= 1.0 + _PARAM_EPS


def visibility(plan: FloorPlan, a, b) -> bool:
    """True iff the open segment a-b crosses no wall interior.

    Contact exactly at the segment endpoints (e.g. an anchor mounted on a
    wall) does not count as blockage.
    """
    a = np.asarray(a, dtype=float).reshape(2)
    b = np.asarray(b, dtype=float).reshape(2)
    if np.linalg.norm(b - a) <= _ON_LINE_EPS:
        raise RejectedInputError("visibility endpoints must be distinct")
    for wall in plan.walls:
        p, q = wall[0], wall[1]
        params = _segment_params(a, b, p, q)
        if params is None:
            # Parallel: blocks only when collinear with interior overlap.
            if _point_line_distance(p, a, b) > _ON_LINE_EPS:
                continue
            d = b - a
            dd = float(np.dot(d, d))
            sp = float(np.dot(p - a, d) / dd)
            sq = float(np.dot(q - a, d) / dd)
            lo, hi = min(sp, sq), max(sp, sq)
            if min(hi, 1.0 - _PARAM_EPS) - max(lo, _PARAM_EPS) > _PARAM_EPS:
                return False
            continue
        t, u = params
        if _PARAM_EPS < t < 1.0 - _PARAM_EPS and -_PARAM_EPS <= u <= 1.0 + _PARAM_EPS:
            return False
    return True


def _mirror(point, p, q):
    d = q - p
    nrm = d / math.hypot(d[0], d[1])
    v = point - p
    perp = v - np.dot(v, nrm) * nrm
    return point - 2.0 * perp


def _build_geometry(vertices: list[np.ndarray], reflections: int) -> PathGeometry:
    verts = np.asarray(vertices, dtype=float)
    legs = np.diff(verts, axis=0)
    total = float(np.sum(np.linalg.norm(legs, axis=1)))
    departure = wrap_angle(math.atan2(legs[0][1], legs[0][0]))
    back = verts[-2] - verts[-1]
    arrival = wrap_angle(math.atan2(back[1], back[0]))
    return PathGeometry(verts, total, reflections, departure, arrival)


def _image_source_path(plan: FloorPlan, source, sink, wall_seq, source_clearance=0.0):
    """Construct and validate the reflection path for one ordered wall sequence."""
    images = [source]
    for wi in wall_seq:
        p, q = plan.walls[wi]
        if _point_line_distance(images[-1], p, q) <= _ON_LINE_EPS:
            return None  # degenerate mirror: image coincides with the point
        images.append(_mirror(images[-1], p, q))

    # Walk back from the sink, intersecting each unfolded leg with its wall.
    bounce_rev = []
    cur = sink
    for i in range(len(wall_seq) - 1, -1, -1):
        p, q = plan.walls[wall_seq[i]]
        params = _segment_params(images[i + 1], cur, p, q)
        if params is None:
            return None
        t, u = params
        if not (_PARAM_EPS < t < 1.0 - _PARAM_EPS):
            return None  # no proper crossing of the wall line
        if not (_PARAM_EPS < u < 1.0 - _PARAM_EPS):
            return None  # bounce misses the wall segment
        cur = images[i + 1] + t * (cur - images[i + 1])
        bounce_rev.append(cur)

    if source_clearance > 0.0:
        first_bounce = bounce_rev[-1]
        if np.linalg.norm(first_bounce - source) < source_clearance:
            return None  # a panel source occludes the wall right behind it

    vertices = [source] + bounce_rev[::-1] + [sink]
    for va, vb in zip(vertices[:-1], vertices[1:]):
        if not visibility(plan, va, vb):
            return None
    return _build_geometry(vertices, len(wall_seq))


def trace_paths(plan: FloorPlan, source, sink, max_reflections: int,
                source_clearance: float = 0.0) -> list[PathGeometry]:
    """All unobstructed paths from source to sink with up to `max_reflections` bounces.

    Includes the direct path when visible.  `source_clearance` drops paths
    whose first bounce lands within that radius of the source, which models a
    panel source blocking the wall it is mounted against.  Paths are sorted
    by (reflection_count, total_length) for reproducibility.
    """
    if max_reflections < 0:
        raise RejectedInputError("max_reflections must be >= 0")
    source = np.asarray(source, dtype=float).reshape(2)
    sink = np.asarray(sink, dtype=float).reshape(2)
    if np.linalg.norm(sink - source) <= _ON_LINE_EPS:
        raise RejectedInputError("source and sink must be distinct")
    for wall in plan.walls:
        if _point_on_segment(source, wall[0], wall[1]):
            raise RejectedInputError("source lies on a wall")
        if _point_on_segment(sink, wall[0], wall[1]):
            raise RejectedInputError("sink lies on a wall")

    paths = []
    if visibility(plan, source, sink):
        paths.append(_build_geometry([source, sink], 0))

    wall_ids = range(plan.wall_count)
    for depth in range(1, max_reflections + 1):
        for seq in product(wall_ids, repeat=depth):
            if any(seq[i] == seq[i + 1] for i in range(depth - 1)):
                continue
            geom = _image_source_path(plan, source, sink, seq, source_clearance)
            if geom is not None:
                paths.append(geom)

    paths.sort(key=lambda g: (g.reflection_count, g.total_length, g.arrival_angle))
    return paths


def unfolded_length(plan: FloorPlan, geometry: PathGeometry, wall_seq=None) -> float:
    """Straight-line length of the path after mirroring the source across its walls.

    When `wall_seq` is None the walls are recovered by matching each bounce
    vertex to the wall segment it lies on.
    """
    verts = geometry.vertices
    if wall_seq is None:
        wall_seq = []
        for v in verts[1:-1]:
            hits = [i for i, w in enumerate(plan.walls) if _point_on_segment(v, w[0], w[1])]
            if not hits:
                raise RejectedInputError("bounce vertex does not lie on any wall")
            wall_seq.append(hits[0])
    image = verts[0]
    for wi in wall_seq:
        p, q = plan.walls[wi]
        image = _mirror(image, p, q)
    return float(np.linalg.norm(verts[-1] - image))
