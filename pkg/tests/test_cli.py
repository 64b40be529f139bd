import json

import pytest
from click.testing import CliRunner

from qspec.cli import main

SIMULATE = """\
experiment: simulate
spectrum:
  - {kind: lorentzian, sigma2: 1.0, tau_c: 1.0}
protocol:
  segments:
    - {tau: 1.0, delta: 0.5}
    - {tau: 1.0}
correlators:
  - axes: xx
  - signs: [1, -1]
n_traj: 2000
seed: 42
"""

CHI_SCAN = """\
experiment: chi-scan
spectrum:
  - {kind: narrow_peak, weight: 1.0e5, center: 50.0, width: 1.5e-3}
  - {kind: white, level: 1.0}
N: 8
tau: 1.0e-3
omega_p_min: 40.0
omega_p_max: 60.0
omega_p_steps: 11
"""

SCAN_MC = """\
experiment: scan
spectrum:
  - {kind: lorentzian, sigma2: 1.0, tau_c: 1.0}
family: measurement
N: 4
tau: 0.1
omega_p_min: 2.0
omega_p_max: 6.0
omega_p_steps: 3
mode: mc
n_traj: 3000
seed: 7
"""

RECONSTRUCT = """\
experiment: reconstruct
spectrum:
  - {kind: white, level: 3.0, cutoff: 60.0}
  - {kind: lorentzian, sigma2: 4.0, tau_c: 0.5}
tau: 0.002
m0: 15
omega_p_min: 4.0
omega_p_max: 60.0
omega_p_steps: 15
"""

WITNESS = """\
experiment: witness
sigma: 1.0
tau_c: 1.0
v2: 100.0
t_min: 0.05
t_max: 0.4
t_steps: 3
n_traj: 3000
seed: 11
"""

FILTER_DUMP = """\
experiment: filter-dump
protocol: {tau: 1.0, delta: 0.5, N: 2}
omega_max: 20.0
omega_steps: 30
spectrum:
  - {kind: lorentzian, sigma2: 1.0, tau_c: 1.0}
"""


def run(tmp_path, command, config_text, *extra, name="cfg.yaml"):
    cfg = tmp_path / name
    cfg.write_text(config_text)
    runner = CliRunner()
    return runner.invoke(
        main, [command, "--config", str(cfg), "--out", str(tmp_path), *extra])


def header_of(path):
    return path.read_text().splitlines()[0]


class TestSubcommands:
    def test_simulate_csv_contract(self, tmp_path):
        result = run(tmp_path, "simulate", SIMULATE)
        assert result.exit_code == 0, result.output
        out = tmp_path / "correlators.csv"
        assert header_of(out) == "name,re_mean,im_mean,std_error,n_traj"
        assert len(out.read_text().splitlines()) == 3
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["seed"] == 42
        assert "correlators.csv" in manifest["artifacts"]

    def test_chi_scan_writes_both_families(self, tmp_path):
        result = run(tmp_path, "chi-scan", CHI_SCAN)
        assert result.exit_code == 0, result.output
        for family in ("measurement", "dd"):
            out = tmp_path / f"chi_scan_{family}.csv"
            assert header_of(out) == "omega_p,chi,W"
            assert len(out.read_text().splitlines()) == 12

    def test_scan_mc_mode(self, tmp_path):
        result = run(tmp_path, "scan", SCAN_MC)
        assert result.exit_code == 0, result.output
        out = tmp_path / "scan_measurement.csv"
        assert header_of(out) == "omega_p,chi,W,mode"
        assert all(line.endswith(",mc") or line.endswith(",unmeasurable")
                   for line in out.read_text().splitlines()[1:])

    def test_reconstruct_csv_contract(self, tmp_path):
        result = run(tmp_path, "reconstruct", RECONSTRUCT)
        assert result.exit_code == 0, result.output
        out = tmp_path / "reconstruction.csv"
        assert header_of(out) == "omega,S_est,S_model,residual"

    def test_witness_csv_contract(self, tmp_path):
        result = run(tmp_path, "witness", WITNESS)
        assert result.exit_code == 0, result.output
        out = tmp_path / "witness.csv"
        assert header_of(out) == "T,re_W,im_W,se_re,se_im,W_gauss2,verdict"
        assert len(out.read_text().splitlines()) == 4

    def test_filter_dump_artifacts(self, tmp_path):
        result = run(tmp_path, "filter-dump", FILTER_DUMP)
        assert result.exit_code == 0, result.output
        assert header_of(tmp_path / "filter_breakpoints.csv") == "t,f"
        assert header_of(tmp_path / "filter_power.csv") == "omega,f2"
        assert header_of(tmp_path / "spectrum.csv") == "omega,S"


class TestValidation:
    def test_negative_tau_exits_1_naming_the_key(self, tmp_path):
        bad = SIMULATE.replace("tau: 1.0, delta: 0.5", "tau: -1.0")
        result = run(tmp_path, "simulate", bad)
        assert result.exit_code == 1
        assert "tau" in result.output

    def test_unknown_key_rejected(self, tmp_path):
        bad = SIMULATE + "typo_key: 3\n"
        result = run(tmp_path, "simulate", bad)
        assert result.exit_code == 1
        assert "typo_key" in result.output

    def test_wrong_experiment_kind_rejected(self, tmp_path):
        result = run(tmp_path, "simulate", CHI_SCAN)
        assert result.exit_code == 1
        assert "experiment" in result.output

    def test_numerical_failure_exits_2(self, tmp_path):
        slow = SIMULATE.replace(
            "{kind: lorentzian, sigma2: 1.0, tau_c: 1.0}",
            "{kind: white, level: 1.0, cutoff: 1.0e10}")
        result = run(tmp_path, "simulate", slow)
        assert result.exit_code in (1, 2)

    def test_chi_scan_numerical_failure_exits_2(self, tmp_path):
        cfg = CHI_SCAN.replace("{kind: white, level: 1.0}",
                               "{kind: white, level: 1.0, cutoff: 1.0e9}")
        result = run(tmp_path, "chi-scan", cfg)
        assert result.exit_code == 2
        assert "numerical" in result.output


class TestDryRun:
    def test_dry_run_prints_timing_and_writes_nothing(self, tmp_path):
        result = run(tmp_path, "simulate", SIMULATE, "--dry-run")
        assert result.exit_code == 0
        assert "t_k" in result.output
        assert not (tmp_path / "correlators.csv").exists()
        assert not (tmp_path / "manifest.json").exists()


class TestDeterminism:
    def test_byte_identical_across_threads_and_reruns(self, tmp_path):
        outputs = []
        for threads, sub in (("1", "a"), ("4", "b"), ("1", "c")):
            out = tmp_path / sub
            out.mkdir()
            cfg = tmp_path / "cfg.yaml"
            cfg.write_text(SIMULATE)
            result = CliRunner().invoke(
                main, ["simulate", "--config", str(cfg), "--out", str(out),
                       "--threads", threads])
            assert result.exit_code == 0, result.output
            outputs.append((out / "correlators.csv").read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]

    def test_seed_override_changes_output(self, tmp_path):
        a = run(tmp_path, "simulate", SIMULATE)
        assert a.exit_code == 0
        first = (tmp_path / "correlators.csv").read_bytes()
        b = run(tmp_path, "simulate", SIMULATE, "--seed", "43")
        assert b.exit_code == 0
        second = (tmp_path / "correlators.csv").read_bytes()
        assert first != second
