"""Trace a floorplan with the image-source method and inspect the paths.

Builds the default 20 m x 12 m room, traces transmitter-to-receiver and
surface-to-receiver paths up to triple reflections, prints a path table, and
saves a picture of the geometry.
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from rislabel import default_scene, desk_radio, trace_paths

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

scene = default_scene(rx=(14.0, 4.0))
radio = desk_radio()

print(f"Room bounds: {scene.plan.bounds}")
print(f"Tx at ({scene.tx[0]:g}, {scene.tx[1]:g}), "
      f"Rx at ({scene.rx[0]:g}, {scene.rx[1]:g}), "
      f"{len(scene.anchors)} labeling surfaces\n")

paths = trace_paths(scene.plan, scene.tx, scene.rx, max_reflections=3)
print(f"Tx -> Rx: {len(paths)} paths")
print(f"{'bounces':>8} {'length m':>10} {'delay ns':>10} {'arrival deg':>12}")
for p in paths[:10]:
    print(f"{p.reflection_count:>8} {p.total_length:>10.3f} "
          f"{p.total_length / 2.998e8 * 1e9:>10.2f} "
          f"{math.degrees(p.arrival_angle):>12.2f}")
if len(paths) > 10:
    print(f"... and {len(paths) - 10} more")

fig, ax = plt.subplots(figsize=(9, 5.5))
for wall in scene.plan.walls:
    ax.plot(wall[:, 0], wall[:, 1], "k-", lw=2)
for p in paths:
    style = {0: ("tab:green", 2.0), 1: ("tab:blue", 0.9),
             2: ("tab:orange", 0.6), 3: ("tab:red", 0.4)}[p.reflection_count]
    ax.plot(p.vertices[:, 0], p.vertices[:, 1], color=style[0], lw=style[1], alpha=0.7)
ax.plot(*scene.tx, "g^", ms=12, label="Tx")
ax.plot(*scene.rx, "rv", ms=12, label="Rx")
for i, a in enumerate(scene.anchors, 1):
    ax.plot(*a.position, "ms", ms=10)
    ax.annotate(f"RIS{i}", a.position, textcoords="offset points", xytext=(6, 6))
ax.set_aspect("equal")
ax.legend(loc="lower left")
ax.set_title("Image-source paths, up to three bounces")
fig.tight_layout()
fig.savefig(OUT / "scene_ray_tracing.png", dpi=120)
print(f"\nfigure -> {OUT / 'scene_ray_tracing.png'}")
