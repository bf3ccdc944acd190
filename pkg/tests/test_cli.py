import json
import subprocess
import sys

import pytest

from solidopt.cli import EXIT_INPUT, EXIT_OK, EXIT_REFUTED, RunConfig, main, run


def report(path):
    return json.loads((path / "report.json").read_text())


def records(rep, command, operation):
    return [r for r in rep["records"] if r["command"] == command and r["operation"] == operation]


def test_regularity_on_l1(tmp_path):
    assert main(["--fixture", "L1", "--command", "regularity", "--out", str(tmp_path)]) == EXIT_OK
    rep = report(tmp_path)
    (metric,) = records(rep, "regularity", "verify_metric_regularity")
    assert metric["status"] == "verified_on_grid"
    assert metric["modulus"] == pytest.approx(1.0, abs=1e-6)
    assert rep["fixture"] == "L1" and len(rep["fixture_sha256"]) == 64
    assert rep["tolerances"]["verify"] == 1e-7 and rep["tool_version"]


def test_scalarize_on_l1(tmp_path):
    main(["--fixture", "L1", "--command", "scalarize", "--out", str(tmp_path)])
    ev = records(report(tmp_path), "scalarize", "evaluate")
    assert ev[0]["z"] == [2.0, -1.0] and ev[0]["value"] == 2.0


def test_empty_command_list(tmp_path, capsys):
    assert main(["--fixture", "L1", "--command", "", "--out", str(tmp_path)]) == EXIT_OK
    rep = report(tmp_path)
    assert rep["records"] == [] and rep["commands"] == []
    assert (tmp_path / "certificates.csv").read_text().count("\n") == 1


def test_unknown_command_is_input_error(tmp_path):
    assert main(["--fixture", "L1", "--command", "bogus", "--out", str(tmp_path)]) == EXIT_INPUT


def test_bad_fixture_is_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('format = "solidopt-fixture"\nversion = 1\n[spaces]\nx = 1\np = 1\ny = 1\n'
                   '[map]\nkind = "affine"\nTx = [[1.0]]\n[map.cone]\nhalfspaces = [[1.0]]\n'
                   'generators = [[-1.0]]\n')
    assert main(["--fixture", str(bad), "--out", str(tmp_path / "o")]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert "bad.toml:10" in err and "generator 0" in err


def test_strict_exit_on_refutation(tmp_path):
    # declare a metric modulus that L1 cannot satisfy
    src = (tmp_path / "src.toml")
    from solidopt.fixtures import fixture_path
    text = fixture_path("L1").read_text().replace("metric_modulus = 1.0", "metric_modulus = 0.5")
    src.write_text(text)
    args = ["--fixture", str(src), "--command", "regularity", "--out", str(tmp_path / "o")]
    assert main(args) == EXIT_OK
    assert main(args + ["--strict"]) == EXIT_REFUTED
    assert "refuted" in (tmp_path / "o" / "certificates.csv").read_text()


def test_grid_and_tol_are_recorded(tmp_path):
    main(["--fixture", "L1", "--command", "regularity", "--grid", "5", "--tol", "1e-6",
          "--out", str(tmp_path)])
    rep = report(tmp_path)
    (metric,) = records(rep, "regularity", "verify_metric_regularity")
    assert metric["grid"]["resolution"] == [5, 5] and metric["tolerance"] == 1e-6
    assert rep["grid"] == 5


def test_v1_front_and_certificates(tmp_path):
    main(["--fixture", "V1", "--command", "oracle,certify", "--out", str(tmp_path)])
    rows = (tmp_path / "front.csv").read_text().splitlines()
    assert rows[0] == "p,x,g,certificate,residual" and len(rows) == 102
    assert all(r.split(",")[3] == "feasible" for r in rows[1:])
    (orc,) = records(report(tmp_path), "oracle", "weak_front_oracle")
    assert orc["x_min"] == 0.0 and orc["x_max"] == pytest.approx(1.0)


def test_skipped_commands_are_reported():
    rep = run(RunConfig("A3", ["penalty", "oracle"]))
    assert [r["operation"] for r in rep.records] == ["skipped", "skipped"]


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "solidopt", "--fixture", "L1", "--command", "scalarize",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0 and (tmp_path / "report.json").exists()
