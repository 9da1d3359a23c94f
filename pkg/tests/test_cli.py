import json
import subprocess
import sys

import numpy as np
import pytest

from anticross import __version__
from anticross.bath import BathSpec
from anticross.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_OK, main, resolve_config, run
from anticross.core import DriveParams, lzs_parameter
from anticross.floquet import quasienergy_map
from anticross.master import quasistationary_scan


def _read(path):
    lines = path.read_text().splitlines()
    meta = json.loads(lines[0][2:])
    header = lines[1].split(",")
    rows = np.array([[float(c) for c in ln.split(",")] for ln in lines[2:]])
    return meta, header, rows


def _run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    rc = main([*argv, "--out", str(out), "--workers", "1"])
    return rc, out


def test_quasienergy_map_smoke_and_golden(tmp_path):
    rc, out = _run(tmp_path, "quasienergy-map", "--A", "0,0.5", "--Delta", "0.6,1.2")
    assert rc == EXIT_OK
    meta, header, rows = _read(out)
    assert header == ["A", "Delta", "eps_gap", "degenerate_flag", "P_LZS"]
    assert rows.shape == (4, 5)
    assert rows[0, 2] == pytest.approx(0.6, abs=1e-12)
    gaps, flags = quasienergy_map([0, 0.5], [0.6, 1.2])
    assert np.array_equal(rows[:, 2], gaps.ravel())
    assert np.array_equal(rows[:, 3], flags.ravel().astype(float))
    assert rows[3, 4] == lzs_parameter(DriveParams(0.5, 1.2))
    assert meta["version"] == __version__ and meta["command"] == "quasienergy-map"
    assert meta["config"] == {"A": [0.0, 0.5], "Delta": [0.6, 1.2]}


def test_free_evolve_presets(tmp_path):
    rc, out = _run(tmp_path, "free-evolve", "--preset", "static", "--tau-max", "200", "--n-points", "4001")
    assert rc == EXIT_OK
    _, header, rows = _read(out)
    assert rows[0, 1] == -1.0
    tau, sz = rows[:, 0], rows[:, 1]
    f = np.fft.rfftfreq(len(sz), tau[1] - tau[0]) * 2 * np.pi
    assert f[np.argmax(np.abs(np.fft.rfft(sz - sz.mean())))] == pytest.approx(0.6, abs=0.02)
    rc, out = _run(tmp_path, "free-evolve", "--preset", "strong-slow", "--tau-max", str(100 * np.pi),
                   "--n-points", "1601", name="strong.csv")
    _, _, rows = _read(out)
    sz = rows[:, 1]
    lag = 32  # one drive period on this grid
    assert np.corrcoef(sz[:-lag], sz[lag:])[0, 1] > 0.9


def test_decoherence_scan_transverse_limit(tmp_path):
    rc, out = _run(tmp_path, "decoherence-scan", "--A", "1,0.5,0", "--S", "sx", "--theta", "1", "--kappa", "1")
    assert rc == EXIT_OK
    _, header, rows = _read(out)
    assert header[1] == "inv_tau_d"
    assert rows[-1, 0] == 0 and abs(rows[-1, 1]) < 1e-6
    assert rows[0, 1] > rows[-1, 1]


def test_qs_scan_high_temperature(tmp_path):
    rc, out = _run(tmp_path, "qs-scan", "--A", "0.5:10:8", "--Delta", "1.5", "--theta", "600")
    assert rc == EXIT_OK
    meta, _, rows = _read(out)
    assert np.abs(rows[:, 1]).max() < 0.02
    ref, _ = quasistationary_scan(1.5, np.linspace(0.5, 10, 8), BathSpec(600.0, 1e-3))
    assert np.array_equal(rows[:, 1], ref)
    assert meta["gaps"] == []


def test_qs_scan_reports_gaps(tmp_path):
    rc, out = _run(tmp_path, "qs-scan", "--A", "0,1", "--Delta", "1", "--theta", "0")
    assert rc == EXIT_OK
    meta, _, _ = _read(out)
    assert len(meta["gaps"]) == 1 and meta["gaps"][0]["A"] == 0
    assert "nan" in out.read_text().splitlines()[2]


def test_ladder_steps(tmp_path):
    rc, out = _run(tmp_path, "ladder", "--Gamma12", "0.005")
    assert rc == EXIT_OK
    meta, header, rows = _read(out)
    assert header == ["F", "field_T", "sigma_z", "tau", "p1", "pointer_sz"]
    assert meta["steps_falling_field"] >= 3
    assert rows[:, 1].min() == pytest.approx(3.42) and rows[:, 1].max() == pytest.approx(3.92)


def test_evolve_and_hysteresis(tmp_path):
    rc, out = _run(tmp_path, "evolve", "--A", "0.1", "--Delta", "0.5", "--kappa", "1", "--n-points", "51")
    assert rc == EXIT_OK
    meta, header, rows = _read(out)
    assert rows.shape == (51, 4) and meta["tau_d"] > 0
    assert rows[0, 1] == pytest.approx(-1, abs=1e-12)
    rc, out = _run(tmp_path, "hysteresis", "--A", "0.1", "--Delta", "0.6", "--theta", "0", name="h.csv")
    meta, _, rows = _read(out)
    assert meta["closure_error"] <= 1e-6 and rows.shape[1] == 3
    rc, out = _run(tmp_path, "hysteresis", "--mode", "transient", "--n-periods", "2", name="t.csv")
    assert rc == EXIT_OK


@pytest.mark.parametrize("command, args", [
    ("quasienergy-map", ["--A", "0:1:3", "--Delta", "0.5,1"]),
    ("free-evolve", ["--n-points", "101"]),
    ("evolve", ["--n-points", "101"]),
    ("qs-scan", ["--A", "0.5,1"]),
    ("decoherence-scan", ["--A", "0.5,1"]),
    ("hysteresis", ["--samples-per-period", "32"]),
    ("ladder", ["--n-periods", "2", "--samples-per-period", "64"]),
])
def test_determinism_and_round_trip(tmp_path, command, args):
    rc1, a = _run(tmp_path, command, *args, name="a.csv")
    rc2, b = _run(tmp_path, command, *args, name="b.csv")
    assert rc1 == rc2 == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    # the embedded config reproduces the file
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(json.loads(a.read_text().splitlines()[0][2:])["config"]))
    rc3, c = _run(tmp_path, command, "--config", str(cfg), name="c.csv")
    assert rc3 == EXIT_OK and c.read_bytes() == a.read_bytes()


def test_workers_do_not_change_output(tmp_path):
    outs = []
    for w in ("1", "3"):
        out = tmp_path / f"w{w}.csv"
        assert main(["qs-scan", "--A", "0.5:3:4", "--out", str(out), "--workers", w]) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_json_format(tmp_path):
    out = tmp_path / "o.json"
    assert main(["quasienergy-map", "--A", "0", "--Delta", "0", "--format", "json", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["rows"] == [[0.0, 0.0, None, True, None]]
    assert doc["metadata"]["gaps"][0]["reason"] == "vanishing Hamiltonian"


def test_exit_codes(tmp_path, capsys):
    assert main(["evolve", "--A", "abc"]) == EXIT_CONFIG
    assert main(["evolve", "--S", "sw"]) == EXIT_CONFIG
    assert main(["evolve", "--A", "-1"]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"A": 1, "colour": "red"}))
    assert main(["evolve", "--config", str(bad)]) == EXIT_CONFIG
    bad.write_text("{not json")
    assert main(["evolve", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["evolve", "--config", str(tmp_path / "missing.json")]) == EXIT_IO
    assert main(["evolve", "--A", "0", "--Delta", "1"]) == EXIT_NUMERIC
    assert main(["evolve", "--out", str(tmp_path / "no" / "dir.csv"), "--n-points", "3"]) == EXIT_IO
    assert main(["qs-scan", "--workers", "0"]) == EXIT_CONFIG


def test_env_worker_default(monkeypatch, tmp_path):
    monkeypatch.setenv("ANTICROSS_WORKERS", "x")
    assert main(["qs-scan", "--A", "1"]) == EXIT_CONFIG
    monkeypatch.setenv("ANTICROSS_WORKERS", "2")
    assert main(["qs-scan", "--A", "1", "--out", str(tmp_path / "o.csv")]) == EXIT_OK


def test_resolve_config_rejects_unknown_and_canonicalises():
    cfg = resolve_config("qs-scan", {"A": "1:2:3"}, {"theta": "2"})
    assert cfg["A"] == [1.0, 1.5, 2.0] and cfg["theta"] == 2.0
    with pytest.raises(ValueError):
        resolve_config("qs-scan", {"B": 1})
    assert run("quasienergy-map", resolve_config("quasienergy-map", {"A": [0], "Delta": [0.6]})).startswith("# {")


def test_console_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "anticross.cli", "quasienergy-map", "--A", "0", "--Delta", "0.6",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().splitlines()[2].startswith("0.0,0.6,0.6")
