"""End-to-end receiver localization from one transmitter and two surfaces.

Runs full trials at a few positions, triangulates the receiver from the
estimated bearings, and shows the bearing-geometry failure mode: a receiver
on the transmitter-surface line is hit hard by small bearing errors.
"""

import math

import numpy as np

from rislabel import (BearingObservation, default_config, run_trial, triangulate,
                      trial_seed_key)

cfg = default_config(mode="single", slots=9)

print("full pipeline (synthesize -> flip -> extract -> associate -> triangulate):")
print(f"{'position':>14} {'RIS1 err deg':>13} {'RIS2 err deg':>13} {'loc err m':>10}")
for pos in [(14.0, 2.0), (10.0, 6.0), (6.0, 10.0)]:
    rec = run_trial(cfg, pos, trial_seed_key(cfg.master_seed, 0, 0))
    print(f"{str(pos):>14} {math.degrees(rec.aoa_error[1]):>13.3f} "
          f"{math.degrees(rec.aoa_error[2]):>13.3f} {rec.loc_error:>10.3f}")

print("\nbearing-geometry sensitivity (analytic, 1-degree error on one anchor):")
a_tx, a_ris = (2.0, 6.0), (7.0, 11.9)


def bearing(anchor, rx):
    return math.atan2(rx[1] - anchor[1], rx[0] - anchor[0]) + math.pi


def loc_error(rx, err_deg):
    est = triangulate([
        BearingObservation(a_tx, bearing(a_tx, rx)),
        BearingObservation(a_ris, bearing(a_ris, rx) + math.radians(err_deg))])
    return float(np.linalg.norm(est.point - np.array(rx))), est.condition


# on the line between the transmitter and the surface vs far off it
online = (4.5, 8.95)   # near the tx-to-surface segment
offline = (12.0, 4.0)
for name, rx in (("on tx-RIS line", online), ("off the line", offline)):
    e, c = loc_error(rx, 1.0)
    print(f"  {name:>15}: position error {e:7.3f} m, conditioning {c:9.1f}")
print("\nthe same 1-degree bearing error costs far more inside the collinear zone.")
