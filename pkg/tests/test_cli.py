import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from chronos import cli

FAST = ["--n", "256", "--m", "1024", "--trials", "10"]


def run_cli(args):
    return cli.main(args)


def test_distribution_outputs(tmp_path):
    out = tmp_path / "dist"
    code = run_cli(["distribution", "--n", "512", "--m", "1024", "--out-dir", str(out)])
    assert code == 0
    lines = (out / "distribution.csv").read_text().splitlines()
    assert lines[0] == "t,rho,re_a_plus,im_a_plus,re_a_minus,im_a_minus"
    assert len(lines) - 1 == 1024
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary) == {
        "total_mass",
        "mean",
        "variance",
        "sigma_T",
        "sigma_H",
        "uncertainty_product",
    }
    assert abs(summary["total_mass"] - 1.0) < 1e-4
    assert abs(summary["mean"] + 2.0) < 0.02
    assert summary["uncertainty_product"] >= 0.4995
    # 17-significant-digit serialization round-trips
    for key, value in summary.items():
        assert float(f"{value:.17g}") == value


def test_distribution_rejects_bad_bounds(tmp_path):
    code = run_cli(["distribution", "--p-min", "2", "--p-max", "1", "--out-dir", str(tmp_path)])
    assert code == 1


def test_distribution_rejects_inadmissible_state(tmp_path, capsys):
    code = run_cli(
        ["distribution", "--p0", "1", "--sigma-p", "1", "--n", "64", "--out-dir", str(tmp_path)]
    )
    assert code == 1
    assert "inadmissible" in capsys.readouterr().err


def test_verify_default_scale_passes(tmp_path):
    out = tmp_path / "v"
    code = run_cli(
        ["verify", "--n", "512", "--m", "4096", "--trials", "25", "--out-dir", str(out)]
    )
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["all_passed"] is True
    names = [c["name"] for c in report["checks"]]
    for family in (
        "resolution_of_identity",
        "gram_imag_rel_gap[1]",
        "positivity_min_eigenvalue",
        "non_projectivity_defect_margin",
        "covariance_shift_error[k=64]",
        "moment_lambda_rel_gap",
        "commutator_residual",
        "uncertainty_product_margin",
    ):
        assert family in names
    assert report["config"]["n"] == 512


def test_verify_default_config_passes(tmp_path):
    # the built-in defaults are the acceptance desk scale; every family
    # must pass with exit 0
    out = tmp_path / "default"
    code = run_cli(["verify", "--out-dir", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["all_passed"] is True
    assert report["config"]["n"] == 2048 and report["config"]["m"] == 4096


def test_verify_coarse_grid_fails_commutator(tmp_path, capsys):
    out = tmp_path / "coarse"
    code = run_cli(["verify", "--n", "64", "--m", "4096", "--trials", "5", "--out-dir", str(out)])
    assert code == 3
    report = json.loads((out / "report.json").read_text())
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    assert "commutator_residual" in failed
    assert "commutator_residual" in capsys.readouterr().err


def test_verify_report_deterministic(tmp_path):
    out = tmp_path / "det"
    args = ["verify"] + FAST + ["--m", "4096", "--out-dir", str(out)]
    run_cli(args)
    first = (out / "report.json").read_bytes()
    run_cli(args)
    assert (out / "report.json").read_bytes() == first


def test_povm_matrix_binary_roundtrip(tmp_path):
    out = tmp_path / "pm"
    code = run_cli(["povm-matrix", "--n", "128", "--out-dir", str(out)])
    assert code == 0
    header = json.loads((out / "povm_matrix.json").read_text())
    assert header["a"] == -3.0 and header["b"] == -1.0
    assert header["n"] == 128 and header["side"] == 256
    raw = np.fromfile(out / header["matrix_file"], dtype=np.float64)
    matrix = raw.view(np.complex128).reshape(header["side"], header["side"])
    assert np.max(np.abs(matrix - matrix.conj().T)) < 1e-12
    eig_lines = (out / "eigenvalues.csv").read_text().splitlines()
    assert eig_lines[0] == "index,eigenvalue"
    eigs = np.array([float(line.split(",")[1]) for line in eig_lines[1:]])
    assert len(eigs) == header["side"]
    assert eigs.min() >= -1e-10
    assert eigs.max() <= 1.0 + 1e-8
    direct = np.linalg.eigvalsh(matrix)
    assert np.max(np.abs(np.sort(direct) - np.sort(eigs))) < 1e-12


def test_povm_matrix_csv_format(tmp_path):
    out = tmp_path / "pmcsv"
    cfg = tmp_path / "m.cfg"
    cfg.write_text("matrix_format = csv\nn = 64\n")
    code = run_cli(["povm-matrix", "--config", str(cfg), "--out-dir", str(out)])
    assert code == 0
    lines = (out / "povm_matrix.csv").read_text().splitlines()
    assert len(lines) - 1 == 128
    assert len(lines[1].split(",")) == 256


def test_povm_matrix_rejects_empty_interval(tmp_path, capsys):
    code = run_cli(["povm-matrix", "--a", "1", "--b", "1", "--out-dir", str(tmp_path)])
    assert code == 1
    assert "a < b" in capsys.readouterr().err


def test_covariance_scan(tmp_path):
    out = tmp_path / "scan"
    code = run_cli(
        ["covariance-scan", "--n", "256", "--m", "256", "--k", "8", "--out-dir", str(out)]
    )
    assert code == 0
    lines = (out / "covariance_scan.csv").read_text().splitlines()
    assert lines[0] == "lambda,max_abs_error"
    assert len(lines) - 1 == 17
    dt = 8.0 / 255
    for offset, k in ((1, -8), (9, 0), (17, 8)):
        lam = float(lines[offset].split(",")[0])
        assert lam == k * dt
        assert float(lines[offset].split(",")[1]) < 1e-8


def test_covariance_scan_shift_beyond_window(tmp_path, capsys):
    code = run_cli(
        ["covariance-scan", "--n", "64", "--m", "64", "--k", "70", "--out-dir", str(tmp_path)]
    )
    assert code == 1
    assert "window" in capsys.readouterr().err


def test_usage_errors_exit_validation(capsys):
    assert run_cli(["no-such-command"]) == 1
    assert run_cli(["verify", "--no-such-flag"]) == 1
    capsys.readouterr()


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("not_a_key = 1\n")
    assert run_cli(["verify", "--config", str(cfg)]) == 1
    assert "unknown configuration key" in capsys.readouterr().err


def test_config_file_bad_value(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = lots\n")
    assert run_cli(["verify", "--config", str(cfg)]) == 1


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "ok.cfg"
    cfg.write_text("# comment line\nn = 64\nm = 128\n")
    out = tmp_path / "fo"
    code = run_cli(
        ["distribution", "--config", str(cfg), "--m", "256", "--out-dir", str(out)]
    )
    assert code == 0
    assert len((out / "distribution.csv").read_text().splitlines()) - 1 == 256


def test_io_failure_exit_code(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    code = run_cli(
        ["distribution", "--n", "64", "--m", "64", "--out-dir", str(blocker / "sub")]
    )
    assert code == 2


def test_thread_cap_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CHRONOS_THREADS", "junk")
    assert run_cli(["distribution", "--n", "64", "--m", "64", "--out-dir", str(tmp_path)]) == 1
    monkeypatch.setenv("CHRONOS_THREADS", "1")
    out = tmp_path / "t1"
    assert run_cli(["distribution", "--n", "64", "--m", "64", "--out-dir", str(out)]) == 0


def test_console_entry_point(tmp_path):
    exe = shutil.which("chronos")
    cmd = (
        [exe]
        if exe
        else [sys.executable, "-m", "chronos.cli"]
    )
    proc = subprocess.run(
        cmd + ["distribution", "--n", "64", "--m", "64", "--out-dir", str(tmp_path / "sp")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
