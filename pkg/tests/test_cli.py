import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from clusterperc import __version__
from clusterperc.cli import main, parse_grid, parse_time


def _read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("text, value", [("5us", 5e-6), ("5µs", 5e-6), ("69.31ms", 69.31e-3),
                                         ("2", 2.0), ("1e-3s", 1e-3), ("10ns", 1e-8)])
def test_parse_time(text, value):
    assert parse_time(text) == pytest.approx(value, rel=1e-15)


def test_parse_grid():
    assert np.allclose(parse_grid("0:1:5"), [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(parse_grid("0.1,0.2"), [0.1, 0.2])
    assert np.allclose(parse_grid("0:10ms:3", parse_time), [0, 5e-3, 10e-3])


def test_sweep_twice_is_identical(tmp_path):
    for run in ("a", "b"):
        assert main(["sweep", "--geometry", "square", "--L", "8", "--replicas", "1",
                     "--seed", "7", "--out", str(tmp_path / run)]) == 0
    for name in ("sweep.csv",):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = _read_csv(tmp_path / "a" / "sweep.csv")
    assert list(rows[0]) == ["p", "t_seconds", "f_lcc_mean", "f_lcc_stderr", "wrap_prob"]
    assert len(rows) == 101
    assert float(rows[0]["f_lcc_mean"]) == 1 / 64


def test_manifest_and_replay(tmp_path):
    out = tmp_path / "run"
    assert main(["sweep", "--geometry", "hexagonal", "--L", "16", "--replicas", "3",
                 "--seed", "4", "--p-grid", "0.5:0.8:7", "--out", str(out)]) == 0
    man = json.loads((out / "sweep_manifest.json").read_text())
    assert man["command"] == "sweep" and man["seed"] == 4
    assert man["version"] == __version__
    assert set(man["outputs"]) == {"sweep.csv"}
    assert man["duration_seconds"] >= 0
    assert man["parameters"]["geometry"] == "hexagonal"
    assert main(["replay", str(out / "sweep_manifest.json")]) == 0
    assert (out / "replay" / "sweep.csv").read_bytes() == (out / "sweep.csv").read_bytes()


def test_replay_detects_tampering(tmp_path):
    out = tmp_path / "run"
    main(["sweep", "--L", "8", "--replicas", "1", "--out", str(out)])
    man = json.loads((out / "sweep_manifest.json").read_text())
    man["outputs"]["sweep.csv"] = "0" * 64
    (out / "sweep_manifest.json").write_text(json.dumps(man))
    assert main(["replay", str(out / "sweep_manifest.json")]) == 1


def test_workers_do_not_change_bytes(tmp_path):
    for w in ("1", "3"):
        assert main(["sweep", "--L", "24", "--replicas", "6", "--workers", w,
                     "--p-grid", "0.4:0.6:5", "--out", str(tmp_path / w)]) == 0
    assert (tmp_path / "1" / "sweep.csv").read_bytes() == (tmp_path / "3" / "sweep.csv").read_bytes()


def test_transparent_sweep_columns(tmp_path):
    assert main(["sweep", "--L", "32", "--epsilon", "0.5", "--replicas", "2",
                 "--t-grid", "0:200ms:5", "--out", str(tmp_path)]) == 0
    rows = _read_csv(tmp_path / "sweep.csv")
    assert list(rows[0])[:2] == ["epsilon", "p"]
    assert float(rows[-1]["f_lcc_mean"]) <= 0.5 + 0.1


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("CLUSTERPERC_OUT", str(tmp_path / "env"))
    assert main(["sweep", "--L", "8", "--replicas", "1"]) == 0
    assert (tmp_path / "env" / "sweep.csv").exists()


@pytest.mark.parametrize("argv", [
    ["sweep", "--geometry", "hexagonal", "--L", "7"],
    ["sweep", "--L", "2"],
    ["sweep", "--geometry", "pentagonal"],
    ["sweep", "--epsilon", "0.5", "--geometry", "triangular", "--L", "8"],
    ["sweep", "--epsilon", "0", "--L", "8"],
    ["sweep", "--p0", "1.5", "--L", "8"],
    ["threshold", "--sizes", "32"],
    ["bogus"],
])
def test_invalid_arguments_exit_2(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)] if argv != ["bogus"] else argv) == 2
    assert "error" in capsys.readouterr().err


def test_threshold_non_percolating_exit_3(tmp_path, capsys):
    code = main(["threshold", "--geometry", "square", "--q", "0.4", "--sizes", "16,32",
                 "--replicas", "10", "--out", str(tmp_path)])
    assert code == 3
    assert "non-percolating" in capsys.readouterr().err


def test_threshold_json(tmp_path):
    assert main(["threshold", "--geometry", "triangular", "--sizes", "16,32",
                 "--replicas", "20", "--out", str(tmp_path)]) == 0
    (rec,) = json.loads((tmp_path / "threshold.json").read_text())
    assert {"geometry", "L_list", "p_c_hat", "sigma", "criterion"} <= rec.keys()
    assert rec["L_list"] == [16, 32]
    assert abs(rec["p_c_hat"] - 0.347) < 0.05


def test_yield_marks_non_percolating_but_succeeds(tmp_path):
    assert main(["yield", "--geometry", "hexagonal", "--q-grid", "0.6,1.0", "--sizes", "32",
                 "--replicas", "20", "--out", str(tmp_path)]) == 0
    rows = _read_csv(tmp_path / "yield.csv")
    assert [r["status"] for r in rows] == ["non-percolating", "ok"]
    assert rows[0]["t_min_seconds"] == "inf"


def _physics(capsys, *argv):
    assert main(["physics", *argv]) == 0
    return json.loads(capsys.readouterr().out)


def test_physics_waveguide(capsys):
    rep = _physics(capsys, "--scheme", "waveguide")
    assert rep["t_lb"] == pytest.approx(25.00e-3, abs=0.01e-3)
    rows = {r["geometry"]: r for r in rep["lattices"]}
    assert rows["square"]["t_c"] == pytest.approx(69.31e-3, abs=0.01e-3)
    assert {"p0", "t0", "d", "p_c", "t_c", "t_lb"} <= rows["square"].keys()


def test_physics_cavity(capsys):
    rows = {r["geometry"]: r for r in _physics(capsys, "--scheme", "cavity")["lattices"]}
    assert rows["square"]["t_c"] == pytest.approx(270.3e-6, abs=0.5e-6)


def test_physics_eta(capsys):
    rep = _physics(capsys, "--eta", "0.316227766", "--t0", "5us")
    assert rep["p0"] == pytest.approx(0.05, rel=1e-8)
    assert rep["scheme"] == "custom"


def test_physics_coherence_flag(capsys):
    rep = _physics(capsys, "--scheme", "bullseye_sil", "--coherence", "1s")
    assert all(r["within_coherence"] for r in rep["lattices"])


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "clusterperc.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == __version__
