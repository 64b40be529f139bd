"""Acceptance suite: one test per top-level criterion, one PASS line each.

Every test prints ``[criterion N] PASS/FAIL: <summary>`` (visible with
``pytest -v -s`` or in the captured output of a failing run) and asserts
the stated tolerance.  Monte Carlo comparisons use 3 standard errors
unless noted; non-Gaussianity detection uses 5.
"""
import itertools
import math

import numpy as np
import pytest
from click.testing import CliRunner

from oracles import chi_time_domain
from qspec import (Lorentzian, MeasurementProtocol, NarrowPeak, OUSource,
                   RngStream, Segment, SignPattern, SpectrumModel, White,
                   alternating_signs, all_axis_correlators, build_filter,
                   comb_coefficient, comb_power_approx, comb_protocol,
                   combine_to_g, correlator_axes, correlator_g,
                   cp2_witness_sweep, no_reprep_expectation,
                   peak_localization, quadratic_ou_source, reconstruct,
                   witness_cxy, witness_cxyx)
from qspec.cli import main as cli_main
from qspec.filters import comb_parseval_sum, filter_power
from qspec.gaussianchi import decay_rate
from qspec.spectroscopy import MEASUREMENT, comb_timing, scan


def report(criterion, passed, detail):
    line = f"[criterion {criterion}] {'PASS' if passed else 'FAIL'}: {detail}"
    print(line)
    assert passed, line


LORENTZIAN = SpectrumModel((Lorentzian(1.0, 1.0),))
OU = OUSource(1.0, 1.0)


def test_criterion_1_gaussian_oracle_agreement():
    # independent 2-D quadrature oracle first, then the MC estimates
    n_traj = 100_000
    fid = MeasurementProtocol((Segment(1.0),))
    echo = MeasurementProtocol((Segment(1.0), Segment(1.0)))
    cases = [
        ("FID", fid, SignPattern((1,)), 0.36788),
        ("echo", echo, SignPattern((1, -1)), 0.33618),
    ]
    details = []
    ok = True
    for name, protocol, signs, chi_ref in cases:
        filt = build_filter(protocol, signs)
        chi_oracle = chi_time_domain(filt, sigma=1.0, tau_c=1.0)
        assert chi_oracle == pytest.approx(chi_ref, abs=5e-5)
        est = correlator_g(protocol, signs, OU, n_traj, RngStream(101))
        dev = abs(abs(est.mean) - math.exp(-chi_oracle))
        ok &= dev < 3 * est.std_error
        details.append(f"{name} |g| off by {dev / est.std_error:.2f} SE")
    report(1, ok, "; ".join(details))


def test_criterion_2_sign_decomposition_identity():
    # 2^n sampled-outcome axis correlators recombine into g(1,-1,...) on
    # shared trajectories
    details = []
    ok = True
    for n in (2, 3, 4):
        protocol = MeasurementProtocol(
            tuple(Segment(0.4, 0.1) for _ in range(n)))
        signs = alternating_signs(n)
        rng = RngStream(200 + n)
        from qspec.montecarlo import alpha_ensemble
        batches = alpha_ensemble(protocol, OU, 40_000, rng)
        cs = all_axis_correlators(protocol, OU, 40_000, rng,
                                  mode="sampled_outcomes", batches=batches)
        direct = correlator_g(protocol, signs, OU, 40_000, rng,
                              batches=batches)
        combined = combine_to_g({k: v.mean for k, v in cs.items()}, signs)
        se = math.sqrt(sum(v.std_error**2 for v in cs.values())
                       + direct.std_error**2)
        dev = abs(combined - direct.mean)
        ok &= dev < 3 * se
        details.append(f"n={n}: {dev / se:.2f} SE"
                       + (" (8-term CP-2)" if n == 3 else ""))
    report(2, ok, "; ".join(details))


def test_criterion_3_same_axis_decomposition():
    from qspec import same_axis_decomposition_check
    details = []
    ok = True
    for n in range(2, 7):
        protocol = MeasurementProtocol(
            tuple(Segment(0.3, 0.1) for _ in range(n)))
        rep = same_axis_decomposition_check(protocol, LORENTZIAN, 30_000,
                                            RngStream(300 + n))
        ok &= rep.passed
        details.append(f"n={n}: {rep.z_score:.2f} SE")
    # quasistatic 4-measurement case: 6 of 16 sign contributions survive
    protocol = MeasurementProtocol(tuple(Segment(1.0) for _ in range(4)))
    slow = OUSource(sigma=3.0, tau_c=1e4)
    est = correlator_axes(protocol, slow, 60_000, RngStream(310), dt=0.05)
    frac = est.mean.real
    ok &= abs(frac - 6.0 / 16.0) < 0.1 * (6.0 / 16.0)
    details.append(f"quasistatic n=4 amplitude {frac:.4f} vs 6/16")
    report(3, ok, "; ".join(details))


def test_criterion_4_no_repreparation_identity():
    details = []
    ok = True
    for n in range(2, 7):
        protocol = MeasurementProtocol(
            tuple(Segment(0.4, 0.1) for _ in range(n)))
        chained = no_reprep_expectation(protocol, OU, 40_000,
                                        RngStream(400 + n))
        product = correlator_axes(protocol, OU, 40_000, RngStream(450 + n),
                                  mode="sampled_outcomes")
        se = math.hypot(chained.std_error, product.std_error)
        dev = abs(chained.mean.real - product.mean.real)
        ok &= dev < 3 * se
        details.append(f"n={n}: {dev / se:.2f} SE")
    report(4, ok, "; ".join(details))


def test_criterion_5_comb_coefficients():
    c1 = abs(comb_coefficient(1, 1.0, 0.0)) ** 2
    ok = abs(c1 - 4.0 / math.pi**2) < 1e-12
    details = [f"|c1|^2 = {c1:.6f}"]
    for tau, delta in ((1.0, 0.0), (1.0, 0.5), (0.2, 1.3)):
        s = comb_parseval_sum(tau, delta)
        ok &= abs(s - tau / (tau + delta)) < 1e-4
    details.append("Parseval sums within 1e-4")
    # delta/(tau+delta) chosen so no odd harmonic is comb-suppressed
    tau, delta, n_blocks = 0.5, 0.1, 16
    w_p = math.pi / (tau + delta)
    filt = build_filter(comb_protocol(tau, delta, n_blocks),
                        alternating_signs(2 * n_blocks))
    worst = 0.0
    for m in (1, 3, 5):
        exact = float(filter_power(filt, m * w_p))
        approx = float(comb_power_approx(m * w_p, tau, delta, n_blocks))
        worst = max(worst, abs(approx / exact - 1.0))
    ok &= worst < 0.1
    details.append(f"N=16 peak approx off by {worst:.3f}")
    report(5, ok, "; ".join(details))


def test_criterion_6_measurement_vs_dd_scan():
    # sharp peak on a white background; tau fixed at 1e-4 so the comb dead
    # time tracks omega_p; N = 16 blocks
    omega0 = 500.0
    spectrum = SpectrumModel((NarrowPeak(1e7, omega0, 1.5e-2), White(50.0)))
    grid = np.unique(np.concatenate([np.arange(140.0, 521.0, 2.5),
                                     [omega0, omega0 / 3.0]]))
    meas = scan(MEASUREMENT, spectrum, grid, tau=1e-4, n_blocks=16)
    dd = scan("dd", spectrum, grid, tau=0.0, n_blocks=16)
    i0 = int(np.argmin(np.abs(grid - omega0)))
    i3 = int(np.argmin(np.abs(grid - omega0 / 3.0)))
    background = np.median(meas.w)
    dip_depth = background - meas.w[i0]
    sub_depth = background - meas.w[i3]
    away = (np.abs(grid - omega0) > 55.0) & (np.abs(grid - omega0 / 3) > 30.0)
    ok = dd.w.max() < 0.01
    ok &= dip_depth > 0.5
    ok &= sub_depth > 0.5
    ok &= meas.w[away].min() > 0.5
    details = [f"max W_DD {dd.w.max():.4f}",
               f"dip depth {dip_depth:.3f} at omega0",
               f"subharmonic depth {sub_depth:.3f} at omega0/3",
               f"background floor {meas.w[away].min():.3f}"]
    # peak localization within the Fourier resolution of the scan time
    for total in (0.2, 0.5):
        loc = peak_localization(spectrum, MEASUREMENT, total)
        err = abs(loc.omega_hat - omega0)
        ok &= loc.localizable and err <= 2.0 * math.pi / total
        details.append(f"T={total}: err {err:.2f} <= {2 * math.pi / total:.2f}")
    report(6, ok, "; ".join(details))


def test_criterion_7_spectrum_round_trip():
    tau = 0.002
    grid = np.arange(4.0, 61.0, 4.0)
    # the Lorentzian must have decayed below the node cap: harmonics above
    # it are dropped under the assumption that S is negligible there
    models = {
        "white": SpectrumModel((White(3.0, cutoff=60.0),)),
        "white+lorentzian": SpectrumModel((White(3.0, cutoff=60.0),
                                           Lorentzian(4.0, 0.5))),
        "faint white+lorentzian": SpectrumModel((White(0.5, cutoff=60.0),
                                                 Lorentzian(4.0, 0.5))),
    }
    details = []
    ok = True
    for name, spectrum in models.items():
        rates = np.array([
            decay_rate(tau, math.pi / wp - tau, spectrum, m_max=15).rate
            for wp in grid])
        rec = reconstruct(grid, rates, tau, m0=15, node_cap=60.0)
        s_true = spectrum.psd(rec.frequencies)
        rel = np.max(np.abs(rec.s_values - s_true) / s_true)
        ok &= rel < 0.1
        details.append(f"{name}: max node error {rel:.3f}")
    report(7, ok, "; ".join(details))


def test_criterion_8_non_gaussian_witness():
    n_traj = 100_000
    tau_c = 1.0
    details = []
    # Gaussian nulls: the odd-y correlators stay within 3 SE of zero
    null_xy = witness_cxy(
        MeasurementProtocol((Segment(0.1, axis="x"), Segment(0.1, axis="y"))),
        OUSource(1.0, tau_c), n_traj, RngStream(801))
    null_xyx = witness_cxyx(0.3, OUSource(1.0, tau_c), n_traj, RngStream(802))
    ok = not null_xy.detected and null_xy.estimate.z_score(0.0) < 3.0
    ok &= not null_xyx.c_xyx.detected
    ok &= null_xyx.c_xyx.estimate.z_score(0.0) < 3.0
    details.append(f"nulls: C_xy {null_xy.z_score:.2f} SE, "
                   f"C_xyx {null_xyx.c_xyx.z_score:.2f} SE")
    # quadratic-OU CP-2 sweep: detection and truncation gap
    totals = np.geomspace(0.01, 1.0, 7) * tau_c
    points = cp2_witness_sweep(totals, sigma=1.0, tau_c=tau_c, v2=100.0,
                               n_traj=n_traj, rng=RngStream(803))
    im_z = [abs(p.g.mean.imag) / p.g.std_error for p in points]
    gap_z = [abs(abs(p.g.mean) - p.w_gauss2) / p.g.std_error for p in points]
    ok &= max(im_z) > 5.0
    ok &= max(gap_z) > 3.0
    details.append(f"max |Im W| significance {max(im_z):.1f} SE")
    details.append(f"max |W| gap to Gaussian truncation {max(gap_z):.1f} SE")
    report(8, ok, "; ".join(details))


SIM_CONFIG = """\
experiment: simulate
spectrum:
  - {kind: lorentzian, sigma2: 1.0, tau_c: 1.0}
protocol:
  segments:
    - {tau: 1.0, delta: 0.5}
    - {tau: 1.0}
correlators:
  - axes: xx
  - axes: xy
  - signs: [1, -1]
n_traj: 20000
seed: 42
"""

SCAN_CONFIG = """\
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
n_traj: 5000
seed: 9
"""


def test_criterion_9_byte_identical_reruns(tmp_path):
    runner = CliRunner()
    files = {}
    for label, config, artifact in (("sim", SIM_CONFIG, "correlators.csv"),
                                    ("scan", SCAN_CONFIG,
                                     "scan_measurement.csv")):
        cfg = tmp_path / f"{label}.yaml"
        cfg.write_text(config)
        outputs = []
        for threads, sub in (("1", "a"), ("7", "b"), ("2", "c")):
            out = tmp_path / f"{label}_{sub}"
            out.mkdir()
            result = runner.invoke(
                cli_main, [label if label == "scan" else "simulate",
                           "--config", str(cfg), "--out", str(out),
                           "--threads", threads])
            assert result.exit_code == 0, result.output
            outputs.append((out / artifact).read_bytes())
        files[label] = outputs[0] == outputs[1] == outputs[2]
    ok = all(files.values())
    report(9, ok, f"byte-identical CSVs across thread counts: {files}")
