"""Command line front end.

Subcommands: simulate (dump one trial's snapshots), extract (run the
estimator on dumped snapshots), locate (end-to-end single position), sweep
(position-grid error table), cdf (fixed-point error CDF).  Outputs are CSV
tables plus a JSON manifest echoing the resolved configuration.
"""

from __future__ import annotations

import argparse
import json
import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .channel import CsiSnapshot, build_propagation_paths, measured_snr_db, synthesize_snapshots
from .config import (ExperimentConfig, config_to_dict, default_config, load_config,
                     with_overrides)
from .errors import ConfigurationError
from .flipping import delta
from .harness import (build_grid, cdf, extract_and_label, mae, mae_localization,
                      run_position, run_trial, sweep, trial_seed_key, write_csv)


def _add_common(sub):
    sub.add_argument("--config", type=str, default=None, help="JSON or TOML config file")
    sub.add_argument("--seed", type=int, default=None, help="master seed override")
    sub.add_argument("--mode", choices=["single", "multi"], default=None)
    sub.add_argument("--slots", type=int, default=None, help="number of time slots T")
    sub.add_argument("--out", type=str, default="out", help="output directory")
    sub.add_argument("--profile", choices=["desk", "paper"], default=None)


def _resolve(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else default_config()
    return with_overrides(cfg, seed=args.seed, mode=args.mode,
                          slots=args.slots, profile=args.profile)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, cfg: ExperimentConfig, extra: dict | None = None) -> None:
    manifest = {"version": __version__, "config": config_to_dict(cfg)}
    if extra:
        manifest.update(extra)
    with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _first_position(cfg: ExperimentConfig) -> tuple[float, float]:
    return cfg.sweep_positions()[0]


def cmd_simulate(args) -> int:
    cfg = _resolve(args)
    out = _outdir(args)
    pos = _first_position(cfg)
    scene = replace(cfg.scene, rx=np.asarray(pos))
    seed = trial_seed_key(cfg.master_seed, 0, 0)
    paths = build_propagation_paths(scene, cfg.radio, cfg.max_reflections)
    snaps = synthesize_snapshots(scene, cfg.radio, cfg.schedule, seed, paths=paths)

    rows = [{"t": t, "index": i, "re": float(v.real), "im": float(v.imag)}
            for t in sorted(snaps) for i, v in enumerate(snaps[t].data)]
    write_csv(rows, out / "snapshots.csv", ["t", "index", "re", "im"])
    path_rows = [{"ris": p.ris_tag, "aoa_rad": p.aoa, "delay_s": p.delay,
                  "gain_re": float(p.gain.real), "gain_im": float(p.gain.imag),
                  "reflections": p.reflection_count} for p in paths]
    write_csv(path_rows, out / "paths.csv",
              ["ris", "aoa_rad", "delay_s", "gain_re", "gain_im", "reflections"])
    snr = measured_snr_db(scene, cfg.radio, cfg.schedule, paths=paths)
    _write_manifest(out, cfg, {"position": list(pos), "measured_snr_db": snr})
    print(f"wrote {len(snaps)} snapshots ({cfg.radio.n_subcarriers} tones x "
          f"{cfg.scene.rx_array.size} antennas) to {out}/snapshots.csv; "
          f"aggregate SNR {snr:.1f} dB")
    return 0


def _read_snapshots(path: Path) -> dict[int, CsiSnapshot]:
    per_slot: dict[int, dict[int, complex]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        cols = {name: i for i, name in enumerate(header)}
        for line in fh:
            cells = line.strip().split(",")
            t = int(cells[cols["t"]])
            idx = int(cells[cols["index"]])
            per_slot.setdefault(t, {})[idx] = (
                float(cells[cols["re"]]) + 1j * float(cells[cols["im"]]))
    out = {}
    for t, entries in per_slot.items():
        data = np.array([entries[i] for i in range(len(entries))])
        out[t] = CsiSnapshot(t, data)
    return out


def cmd_extract(args) -> int:
    cfg = _resolve(args)
    out = _outdir(args)
    snaps = _read_snapshots(Path(args.snapshots))
    expected = cfg.scene.rx_array.size * cfg.radio.n_subcarriers
    if any(s.data.size != expected for s in snaps.values()):
        raise ConfigurationError("snapshot dimensions do not match the configuration")
    deltas = {t: delta(snaps[t], snaps[1], cfg.schedule)
              for t in sorted(snaps) if t >= 2}
    labeled = extract_and_label(cfg, deltas, build_grid(cfg))
    rows = [{"ris": lp.ris_id, "aoa_rad": lp.base.aoa, "delay_s": lp.base.delay,
             "beta_re": float(lp.beta.real), "beta_im": float(lp.beta.imag),
             "beta_abs": abs(lp.beta), "is_los": int(lp.is_los),
             "association_score": lp.association_score} for lp in labeled]
    rows.sort(key=lambda r: (r["ris"], -r["beta_abs"]))
    if rows:
        write_csv(rows, out / "extracted.csv",
                  ["ris", "aoa_rad", "delay_s", "beta_re", "beta_im", "beta_abs",
                   "is_los", "association_score"])
    _write_manifest(out, cfg, {"snapshots": str(args.snapshots), "paths_found": len(rows)})
    print(f"extracted {len(rows)} labeled paths -> {out}/extracted.csv")
    return 0


def cmd_locate(args) -> int:
    cfg = _resolve(args)
    out = _outdir(args)
    pos = _first_position(cfg)
    record = run_trial(cfg, pos, trial_seed_key(cfg.master_seed, 0, 0))
    row = {"x_true": record.position[0], "y_true": record.position[1],
           "x_est": math.nan if record.loc_estimate is None else record.loc_estimate[0],
           "y_est": math.nan if record.loc_estimate is None else record.loc_estimate[1],
           "loc_error_m": record.loc_error,
           "tx_aoa_rad": math.nan if record.tx_aoa_est is None else record.tx_aoa_est}
    for k in sorted(record.aoa_error):
        row[f"aoa_error_ris{k}_deg"] = math.degrees(record.aoa_error[k])
    write_csv([row], out / "locate.csv")
    _write_manifest(out, cfg, {"position": list(pos)})
    print(f"position estimate {row['x_est']:.3f}, {row['y_est']:.3f} "
          f"(true {pos[0]:.3f}, {pos[1]:.3f}; error {record.loc_error:.3f} m)")
    return 0


def cmd_sweep(args) -> int:
    cfg = _resolve(args)
    out = _outdir(args)
    rows = sweep(cfg)
    write_csv(rows, out / "sweep.csv")
    _write_manifest(out, cfg, {"positions": len(rows)})
    print(f"swept {len(rows)} positions x {cfg.trials} trials -> {out}/sweep.csv")
    return 0


def cmd_cdf(args) -> int:
    cfg = _resolve(args)
    out = _outdir(args)
    pos = _first_position(cfg)
    records = run_position(cfg, pos, 0)
    rows = []
    for k in sorted(records[0].aoa_error):
        for value, fraction in cdf(records, f"aoa_error:{k}"):
            rows.append({"metric": f"aoa_error_ris{k}_deg",
                         "value": math.degrees(value), "fraction": fraction})
    if cfg.localize:
        finite = [r for r in records if math.isfinite(r.loc_error)]
        if finite:
            for value, fraction in cdf(finite, "loc_error"):
                rows.append({"metric": "loc_error_m", "value": value, "fraction": fraction})
    write_csv(rows, out / "cdf.csv", ["metric", "value", "fraction"])
    stats = mae(records)
    _write_manifest(out, cfg, {"position": list(pos),
                               "mae_aoa_deg": {str(k): v for k, v in stats.items()},
                               "mae_loc_m": mae_localization(records)})
    summary = ", ".join(f"RIS{k} {v:.2f} deg" for k, v in stats.items())
    print(f"{cfg.trials} trials at ({pos[0]:.2f}, {pos[1]:.2f}): MAE {summary} "
          f"-> {out}/cdf.csv")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rislabel",
        description="Labeled-multipath channel simulation, extraction, and localization")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="synthesize one trial and dump its snapshots")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("extract", help="run the estimator on dumped snapshots")
    _add_common(p)
    p.add_argument("--snapshots", type=str, required=True, help="snapshots.csv from simulate")
    p.set_defaults(func=cmd_extract)

    p = subs.add_parser("locate", help="end-to-end localization at a single position")
    _add_common(p)
    p.set_defaults(func=cmd_locate)

    p = subs.add_parser("sweep", help="error table over a grid of receiver positions")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("cdf", help="error CDF over trials at a fixed position")
    _add_common(p)
    p.set_defaults(func=cmd_cdf)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
