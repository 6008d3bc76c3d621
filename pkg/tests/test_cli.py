"""End-to-end CLI behavior: resolution precedence, exit codes, manifests."""

import json
import subprocess
import sys

import pytest

from etmsim.cli import main
from etmsim.params import PhysicalSetup, dimensionless_time

FAST = ["--n-points", "32", "--q-points", "257"]


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def test_dry_run_empty_config_resolves_defaults(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["schmidt", "--dry-run"]) == 0
    resolved = json.loads(capsys.readouterr().out)
    assert resolved["T_I"] == 1e-3
    assert resolved["sigma_e"] == 2.0
    assert resolved["chi"]["kind"] == "lorentzian-pair"
    assert resolved["grid"]["n_points"] == 800
    assert list(tmp_path.iterdir()) == []


def test_flags_override_file_values(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"T_I": 5e-3, "sigma_e": 1.0}))
    rc = main(["schmidt", "--config", str(cfg), "--T-I", "1e-3", "--dry-run"])
    assert rc == 0
    resolved = json.loads(capsys.readouterr().out)
    assert resolved["T_I"] == 1e-3
    assert resolved["sigma_e"] == 1.0


def test_negative_sigma_names_the_field(capsys):
    assert main(["schmidt", "--sigma-e", "-1", "--dry-run"]) == 1
    err = capsys.readouterr().err
    assert "sigma_e" in err


def test_unknown_keys_reported_together(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1, "chi": {"nope": 2}}))
    assert main(["schmidt", "--config", str(cfg), "--dry-run"]) == 1
    err = capsys.readouterr().err
    assert "bogus" in err
    assert "chi.nope" in err


def test_unknown_flag_exits_validation():
    with pytest.raises(SystemExit) as err:
        main(["schmidt", "--nope"])
    assert err.value.code == 1


def test_physical_group_resolves_interaction_time(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"physical": {"L": 1e5, "lambda_p": 100.0, "beta": 0.5}}))
    assert main(["schmidt", "--config", str(cfg), "--dry-run"]) == 0
    resolved = json.loads(capsys.readouterr().out)
    setup = PhysicalSetup(L=1e5, lambda_p=100.0, beta=0.5)
    assert resolved["T_I"] == dimensionless_time(setup)

    cfg.write_text(
        json.dumps({"T_I": 1e-3, "physical": {"L": 1e5, "lambda_p": 100.0, "beta": 0.5}})
    )
    assert main(["schmidt", "--config", str(cfg), "--dry-run"]) == 1
    assert "either" in capsys.readouterr().err


def test_amplitude_writes_outputs_and_manifest(tmp_path):
    out = tmp_path / "run"
    rc = main(["amplitude", "--out", str(out), *FAST])
    assert rc == 0
    assert (out / "amplitude.csv").exists()
    assert (out / "amplitude.meta.json").exists()
    manifest = read_json(out / "manifest.json")
    assert manifest["subcommand"] == "amplitude"
    assert sorted(manifest["outputs"]) == ["amplitude.csv", "amplitude.meta.json"]
    assert manifest["resolved_config"]["grid"]["n_points"] == 32
    assert manifest["flag_overrides"]["grid.n_points"] == 32
    assert "T_I" in manifest["defaults_applied"]
    assert manifest["wall_time_s"] >= 0
    assert manifest["error"] is None


def test_schmidt_reports_convergence(tmp_path):
    out = tmp_path / "run"
    rc = main(["schmidt", "--out", str(out), *FAST])
    assert rc == 0
    assert (out / "spectrum.csv").exists()
    assert (out / "modes.csv").exists()
    conv = read_json(out / "manifest.json")["convergence"]
    assert conv["converged"] is True
    assert conv["kappa"] >= 1.0
    assert len(conv["history"]) >= 1
    assert conv["history"][0]["n_points"] == 32


def test_hom_delta_range_flag(tmp_path):
    out = tmp_path / "run"
    rc = main(["hom", "--out", str(out), *FAST, "--delta-range=-0.2:0.2:41"])
    assert rc == 0
    lines = (out / "scan.csv").read_text().splitlines()
    assert lines[0] == "delta_over_lambda_p,p12"
    assert len(lines) == 42
    assert float(lines[1].split(",")[0]) == -0.2
    assert float(lines[-1].split(",")[0]) == 0.2
    summary = read_json(out / "scan.summary.json")
    assert {"kappa", "fwhm", "baseline", "truncated_weight"} <= set(summary)


def test_discriminate_outputs(tmp_path):
    out = tmp_path / "run"
    rc = main(
        [
            "discriminate",
            "--out",
            str(out),
            *FAST,
            "--modes",
            "2",
            "--shots",
            "500",
            "--seed",
            "7",
        ]
    )
    assert rc == 0
    record = read_json(out / "tomography.json")
    assert record["shots"] == 500
    total = sum(m["estimate"] for m in record["modes"]) + record["other_rate"]
    assert total == pytest.approx(1.0, abs=1e-12)
    manifest = read_json(out / "manifest.json")
    assert "probe_scan_mode1.csv" in manifest["outputs"]
    assert "probe_scan_mode2.csv" in manifest["outputs"]
    assert (out / "probe_scan_mode2.csv").exists()


def test_sweep_single_point(tmp_path):
    out = tmp_path / "run"
    rc = main(
        [
            "sweep",
            "heatmap",
            "--out",
            str(out),
            *FAST,
            "--t-axis",
            "1e-3:1e-3:1",
            "--sigma-axis",
            "2:2:1",
        ]
    )
    assert rc == 0
    lines = (out / "heatmap.csv").read_text().splitlines()
    assert lines[0] == "T_I,sigma_e,H2,kappa,converged"
    assert len(lines) == 2
    assert lines[1].endswith("true")


def test_sweep_partial_exit_code(tmp_path):
    out = tmp_path / "run"
    rc = main(
        [
            "sweep",
            "heatmap",
            "--out",
            str(out),
            *FAST,
            "--t-axis",
            "1e-3:1e308:2",
            "--sigma-axis",
            "2:2:1",
        ]
    )
    assert rc == 3
    manifest = read_json(out / "manifest.json")
    assert manifest["convergence"]["points"] == 2
    assert manifest["convergence"]["converged"] == 1
    assert len(manifest["convergence"]["failed"]) == 1
    assert (out / "heatmap.csv").exists()


def test_sweep_cut_needs_path(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["sweep", "cut", "--out", str(out), *FAST])
    assert rc == 1
    manifest = read_json(out / "manifest.json")
    assert manifest["error"] is not None
    assert "path" in capsys.readouterr().err


def test_sweep_cut_with_path(tmp_path):
    out = tmp_path / "run"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "sweep": {"path": [[1e-3, 2.0], [1e-3, 2.0]]},
                "grid": {"n_points": 32, "q_points": 257},
            }
        )
    )
    rc = main(["sweep", "cut", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    lines = (out / "cut.csv").read_text().splitlines()
    assert lines[0] == "arc_index,T_I,sigma_e,kappa"
    assert len(lines) == 3
    assert lines[1].split(",")[3] == lines[2].split(",")[3]


def test_manifest_round_trip_reproduces_outputs(tmp_path):
    first = tmp_path / "a"
    second = tmp_path / "b"
    rc = main(
        ["hom", "--out", str(first), *FAST, "--T-I", "2e-3", "--delta-range=-0.1:0.1:21"]
    )
    assert rc == 0
    echoed = read_json(first / "manifest.json")["resolved_config"]
    cfg = tmp_path / "echo.json"
    cfg.write_text(json.dumps(echoed))
    rc = main(["hom", "--config", str(cfg), "--out", str(second)])
    assert rc == 0
    assert (first / "scan.csv").read_bytes() == (second / "scan.csv").read_bytes()
    assert (first / "scan.summary.json").read_bytes() == (
        second / "scan.summary.json"
    ).read_bytes()


def test_jobs_env_fallback(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("ETMSIM_JOBS", "2")
    out = tmp_path / "run"
    rc = main(
        [
            "sweep",
            "heatmap",
            "--out",
            str(out),
            *FAST,
            "--t-axis",
            "1e-3:1e-3:1",
            "--sigma-axis",
            "2:2:1",
        ]
    )
    assert rc == 0
    assert read_json(out / "manifest.json")["jobs"] == 2

    monkeypatch.setenv("ETMSIM_JOBS", "abc")
    assert main(["schmidt", "--dry-run"]) == 1
    assert "ETMSIM_JOBS" in capsys.readouterr().err


def test_numerical_failure_exit_code(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["amplitude", "--out", str(out), *FAST, "--T-I", "1e308"])
    assert rc == 2
    manifest = read_json(out / "manifest.json")
    assert "NumericalError" in manifest["error"]
    assert "numerical failure" in capsys.readouterr().err


def test_module_entry_point_version():
    proc = subprocess.run(
        [sys.executable, "-m", "etmsim.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "etmsim 0.1.0"
