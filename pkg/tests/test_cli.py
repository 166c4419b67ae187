"""Command-line front end: every subcommand end to end on tiny configs."""

import json
import math

import pytest

from rislabel.cli import main
from rislabel.config import config_to_dict, default_config


@pytest.fixture()
def tiny_config_file(tmp_path):
    cfg = default_config(mode="single", slots=3)
    raw = config_to_dict(cfg)
    raw["radio"]["subcarrier_indices"] = raw["radio"]["subcarrier_indices"][::4]
    raw["estimator"]["max_paths"] = 6
    raw["estimator"]["cyclic_rounds"] = 2
    raw["experiment"]["trials"] = 2
    raw["experiment"]["positions"] = [[14.0, 2.0]]
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw))
    return path


def read_csv(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


class TestSimulateExtract:
    def test_simulate_writes_snapshots_paths_manifest(self, tiny_config_file, tmp_path):
        out = tmp_path / "sim"
        assert main(["simulate", "--config", str(tiny_config_file),
                     "--out", str(out)]) == 0
        rows = read_csv(out / "snapshots.csv")
        slots = {int(r["t"]) for r in rows}
        assert slots == {1, 2, 3}
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["schedule"]["mode"] == "single"
        assert "measured_snr_db" in manifest
        assert (out / "paths.csv").exists()

    def test_extract_consumes_simulate_output(self, tiny_config_file, tmp_path):
        sim = tmp_path / "sim"
        main(["simulate", "--config", str(tiny_config_file), "--out", str(sim)])
        out = tmp_path / "ext"
        assert main(["extract", "--config", str(tiny_config_file),
                     "--snapshots", str(sim / "snapshots.csv"),
                     "--out", str(out)]) == 0
        rows = read_csv(out / "extracted.csv")
        assert rows
        by_ris = {}
        for r in rows:
            by_ris.setdefault(r["ris"], []).append(int(r["is_los"]))
        for flags in by_ris.values():
            assert sum(flags) == 1  # one sightline per surface

    def test_extract_recovers_true_bearings(self, tiny_config_file, tmp_path):
        sim = tmp_path / "sim"
        main(["simulate", "--config", str(tiny_config_file), "--out", str(sim)])
        out = tmp_path / "ext"
        main(["extract", "--config", str(tiny_config_file),
              "--snapshots", str(sim / "snapshots.csv"), "--out", str(out)])
        truth = {}
        for r in read_csv(sim / "paths.csv"):
            k = int(r["ris"])
            if k >= 1:
                delay = float(r["delay_s"])
                if k not in truth or delay < truth[k][0]:
                    truth[k] = (delay, float(r["aoa_rad"]))
        for r in read_csv(out / "extracted.csv"):
            if int(r["is_los"]):
                k = int(r["ris"])
                err = abs(float(r["aoa_rad"]) - truth[k][1])
                err = min(err, 2 * math.pi - err)
                assert math.degrees(err) < 5.0


class TestLocate:
    def test_locate_reports_position(self, tiny_config_file, tmp_path):
        out = tmp_path / "loc"
        assert main(["locate", "--config", str(tiny_config_file),
                     "--out", str(out)]) == 0
        row = read_csv(out / "locate.csv")[0]
        assert float(row["x_true"]) == 14.0
        assert float(row["loc_error_m"]) < 2.0


class TestSweepCdf:
    def test_sweep_and_determinism(self, tiny_config_file, tmp_path):
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        assert main(["sweep", "--config", str(tiny_config_file), "--out", str(out1)]) == 0
        assert main(["sweep", "--config", str(tiny_config_file), "--out", str(out2)]) == 0
        assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()

    def test_cdf_output(self, tiny_config_file, tmp_path):
        out = tmp_path / "cdf"
        assert main(["cdf", "--config", str(tiny_config_file), "--out", str(out)]) == 0
        rows = read_csv(out / "cdf.csv")
        metrics = {r["metric"] for r in rows}
        assert "aoa_error_ris1_deg" in metrics and "aoa_error_ris2_deg" in metrics
        fracs = [float(r["fraction"]) for r in rows if r["metric"] == "aoa_error_ris1_deg"]
        assert fracs[-1] == 1.0

    def test_mode_and_slots_overrides(self, tiny_config_file, tmp_path):
        out = tmp_path / "ov"
        assert main(["simulate", "--config", str(tiny_config_file), "--out", str(out),
                     "--mode", "multi", "--slots", "5", "--seed", "77"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["schedule"]["mode"] == "multi"
        assert manifest["config"]["schedule"]["slots"] == 5
        assert manifest["config"]["experiment"]["master_seed"] == 77


class TestHelp:
    def test_subcommand_required(self, capsys):
        with pytest.raises(SystemExit):
            main([])

    def test_version(self, capsys):
        with pytest.raises(SystemExit):
            main(["--version"])
