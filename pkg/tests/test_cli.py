import io
import math
import json
import subprocess
import sys

import pytest

from riemann_uncertainty.cli import main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), stdout=buf)
    return code, buf.getvalue()


def test_zeta_values(tmp_path):
    code, out = run("zeta", "--s", "2", "--prec", "64", "--manifest", str(tmp_path / "m.json"))
    assert code == 0 and out.startswith("1.6449340668")
    code, out = run("zeta", "--s", "0")
    assert (code, out) == (0, "-0.5\n")
    code, out = run("zeta", "--s", "0.5+14i")
    assert code == 0 and out.strip().endswith("i")
    man = json.loads((tmp_path / "m.json").read_text())
    assert man["command"] == "zeta" and man["precision"]["bits"] == 64
    assert {"config_echo", "series_fingerprint", "wall_time_ms", "tool_version"} <= set(man)


def test_exit_codes():
    assert run("zeta", "--s", "1")[0] == 2
    assert run("zeta", "--s", "1 + 2i")[0] == 1
    assert run("zeta")[0] == 1
    assert run("bogus")[0] == 1
    assert run("coeffs", "--order", "4", "--radius", "1")[0] == 1
    assert run("verify", "--eps", "0.2")[0] == 1
    assert run("zero-find", "--t0", "5")[0] == 2


def test_prec_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv("RIEMANN_PREC_BITS", "96")
    m = tmp_path / "m.json"
    assert run("zeta", "--s", "3", "--manifest", str(m))[0] == 0
    assert json.loads(m.read_text())["precision"]["bits"] == 96


def test_coeffs_cache(tmp_path):
    args = ("coeffs", "--order", "4", "--cache-dir", str(tmp_path))
    code, first = run(*args)
    assert code == 0 and first.startswith("cache: miss")
    code, second = run(*args)
    assert second.startswith("cache: hit")
    assert first.split("\n")[1:] == second.split("\n")[1:]
    assert "C_0 = -0.5\n" in first


def test_verify_linear_and_mismatch():
    code, out = run("verify", "--series", "linear", "--alpha", "0.3", "--beta", "0.1")
    rep = json.loads(out)
    assert code == 0 and rep["classification"] == "consistent"
    code, out = run("verify", "--series", "linear", "--alpha", "0.3+0.2i", "--beta", "0.1-0.3i")
    assert code == 4 and json.loads(out)["classification"] == "paper_form_mismatch"
    code, out = run("verify", "--series", "custom", "--coeffs", "1,2i,-0.5", "--alpha", "0.2",
                    "--beta", "-0.1")
    assert code == 0
    assert run("verify", "--series", "custom", "--alpha", "0.1")[0] == 1


def test_verify_constant_series():
    # every quantity vanishes; double-precision rounding must not read as a mismatch
    code, out = run("verify", "--series", "constant", "--constant", "2-3i", "--alpha", "1.5",
                    "--beta", "0.3", "--route", "matrix", "--dim", "4")
    rep = json.loads(out)
    assert code == 0 and rep["classification"] == "consistent"
    assert rep["truncation"] > 4  # auto-raised
    # with a phase Im(alpha conj beta) != 0 the printed form is |c|^4 Re^2[1 - e^{-2i phi}] != 0
    code, out = run("verify", "--series", "constant", "--constant", "2-3i", "--alpha", "1.5+0.5i",
                    "--beta", "0.3", "--route", "closed")
    rep = json.loads(out)
    assert code == 4 and float(rep["rhs_paper"]) == pytest.approx(169 * (1 - math.cos(0.3)) ** 2)


def test_campaign():
    code, out = run("campaign", "--trials", "10", "--seed", "5")
    d = json.loads(out)
    assert code == 0 and d["trials"] == 10 and d["violations"] == []


def test_scan_and_replay(tmp_path):
    out = tmp_path / "scan"
    argv = ("scan", "--eps", "0.2", "--t-min", "0", "--t-max", "0.3", "--step", "0.1",
            "--order", "20", "--out", str(out))
    code, text = run(*argv)
    assert code == 0
    summary = json.loads(text.splitlines()[0])
    assert summary["rows"] == 4
    csv_text = (out / "scan.csv").read_text()
    assert csv_text.splitlines()[0] == "t,g,x,re_zeta,satisfied"
    man = json.loads((out / "manifest.json").read_text())
    assert str(out / "scan.csv") in man["outputs"]
    (out / "scan.csv").write_text("stale")
    # replay regenerates the file, and reports the stale copy it overwrote as identical afterwards
    assert main(["replay", str(out / "manifest.json")], stdout=io.StringIO()) == 0
    assert (out / "scan.csv").read_text() == csv_text


def test_replay_detects_identity(tmp_path, capsys):
    m = tmp_path / "z.json"
    run("zeta", "--s", "0.3+2i", "--manifest", str(m))
    code = main(["replay", str(m)])
    assert code == 0
    assert "identical" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert main(["replay", str(bad)]) == 1


def test_fig1_has_f_column(tmp_path):
    code, _ = run("fig1", "--eps", "0.5", "--t-min", "1", "--t-max", "1.2", "--step", "0.1",
                  "--order", "10", "--out", str(tmp_path))
    rows = (tmp_path / "fig1.csv").read_text().splitlines()
    assert code == 0 and rows[0].endswith(",f") and len(rows) == 4


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "riemann_uncertainty", "zeta", "--s", "2",
                           "--manifest", str(tmp_path / "m.json")],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0 and proc.stdout.startswith("1.64493406684822643647")
    proc = subprocess.run([sys.executable, "-m", "riemann_uncertainty", "coeffs", "--order", "3",
                           "--radius", "1.5"], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 1
