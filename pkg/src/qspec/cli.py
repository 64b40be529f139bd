"""Config-driven batch entry point.

Every subcommand reads one YAML config, validates it fully before any
computation, writes CSV artifacts plus a run manifest into ``--out``,
and exits 0 on success, 1 on a validation failure (the message names the
offending key) and 2 on a numerical failure.  Identical config + seed
give byte-identical CSVs regardless of ``--threads``.
"""
from __future__ import annotations

import csv
import json
import math
import os
import sys

import click
import numpy as np

from . import __version__
from .config import (build_protocol, build_signs, build_spectrum, check_keys,
                     config_digest, load_config)
from .filters import (MeasurementProtocol, alternating_signs, build_filter,
                      filter_power)
from .gaussianchi import QuadratureError, decay_rate
from .montecarlo import correlator_axes, correlator_g, source_for_spectrum
from .noise import ConfigurationError, RngStream
from .nongaussian import cp2_witness_sweep
from .spectroscopy import comb_timing, reconstruct
from .spectroscopy import scan as run_scan


def _fmt(value) -> str:
    """Stable float formatting for the CSV determinism contract."""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return f"{value:.17g}"
    return str(value)


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(out_dir: str, config_path: str, seed: int,
                    artifacts: list[str]) -> None:
    manifest = {
        "config_sha256": config_digest(config_path),
        "seed": seed,
        "artifacts": sorted(artifacts),
        "versions": {
            "qspec": __version__,
            "numpy": np.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
    }
    with open(os.path.join(out_dir, "manifest.json"), "w",
              encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _print_timing(protocol: MeasurementProtocol) -> None:
    click.echo("   k        t_k      tau_k    delta_k axis")
    for k, (t, seg) in enumerate(zip(protocol.measurement_times,
                                     protocol.segments), start=1):
        click.echo(f"{k:4d} {t:10.6g} {seg.tau:10.6g} {seg.delta:10.6g}"
                   f"    {seg.axis}")


def _threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("QSPEC_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(
                f"QSPEC_THREADS must be an integer, got {env!r}"
            ) from None
    return os.cpu_count() or 1


def common_options(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(exists=True, dir_okay=False),
                      help="YAML experiment config.")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override the config seed.")(fn)
    fn = click.option("--threads", type=int, default=None,
                      help="Worker cap (default: QSPEC_THREADS or all cores).")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(file_okay=False),
                      default=".", help="Output directory.")(fn)
    fn = click.option("--dry-run", is_flag=True,
                      help="Validate and print protocol timing only.")(fn)
    return fn


def _run(kind: str, fn, config_path: str, seed, threads, out_dir: str,
         dry_run: bool) -> None:
    try:
        tree = load_config(config_path)
        if tree["experiment"] != kind:
            raise ConfigurationError(
                f"config key 'experiment' is {tree['experiment']!r}; "
                f"this subcommand runs {kind!r}"
            )
        os.makedirs(out_dir, exist_ok=True)
        artifacts = fn(tree, seed, _threads(threads), out_dir, dry_run)
        if not dry_run:
            _write_manifest(out_dir, config_path,
                            seed if seed is not None
                            else int(tree.get("seed", 0)), artifacts)
    except ConfigurationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except (QuadratureError, FloatingPointError, np.linalg.LinAlgError) as exc:
        click.echo(f"numerical error: {exc}", err=True)
        sys.exit(2)


def _seed_of(tree: dict, override, context: str = "config") -> int:
    seed = override if override is not None else tree.get("seed", 0)
    if not isinstance(seed, int) or seed < 0 or seed >= 1 << 64:
        raise ConfigurationError(f"{context}.seed must be a u64 integer")
    return seed


def _grid(tree: dict, context: str) -> np.ndarray:
    lo = float(tree["omega_p_min"])
    hi = float(tree["omega_p_max"])
    steps = tree["omega_p_steps"]
    if not isinstance(steps, int) or steps < 2:
        raise ConfigurationError(f"{context}.omega_p_steps must be an int >= 2")
    if not 0 < lo < hi:
        raise ConfigurationError(
            f"{context}.omega_p_min/omega_p_max must satisfy 0 < min < max"
        )
    return np.linspace(lo, hi, steps)


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Noise-spectroscopy experiments for a dephasing qubit."""


# ---------------------------------------------------------------------------
# simulate: Monte Carlo correlators for one protocol
# ---------------------------------------------------------------------------

def _do_simulate(tree, seed, threads, out_dir, dry_run):
    check_keys(tree, {"experiment", "spectrum", "protocol", "correlators",
                      "n_traj", "seed", "mode", "dt", "output"},
               {"spectrum", "protocol", "correlators", "n_traj"}, "config")
    spectrum = build_spectrum(tree["spectrum"])
    protocol = build_protocol(tree["protocol"])
    n_traj = tree["n_traj"]
    if not isinstance(n_traj, int) or n_traj < 2:
        raise ConfigurationError("config.n_traj must be an integer >= 2")
    mode = tree.get("mode", "analytic_per_trajectory")
    if mode not in ("analytic_per_trajectory", "sampled_outcomes"):
        raise ConfigurationError(f"config.mode: unknown estimator mode {mode!r}")
    dt = tree.get("dt")
    if dt is not None:
        dt = float(dt)
        if dt <= 0:
            raise ConfigurationError("config.dt must be positive")
    requests = tree.get("correlators")
    if not isinstance(requests, list) or not requests:
        raise ConfigurationError("config.correlators must be a non-empty list")
    jobs = []
    for i, req in enumerate(requests):
        ctx = f"config.correlators[{i}]"
        check_keys(req, {"axes", "signs"}, set(), ctx)
        if ("axes" in req) == ("signs" in req):
            raise ConfigurationError(f"{ctx} needs exactly one of axes/signs")
        if "axes" in req:
            axes = req["axes"]
            if (not isinstance(axes, str) or len(axes) != protocol.n
                    or any(a not in "xy" for a in axes)):
                raise ConfigurationError(
                    f"{ctx}.axes must be an x/y string of length {protocol.n}"
                )
            jobs.append(("C_" + axes, axes, None))
        else:
            signs = build_signs(req["signs"], protocol.n, f"{ctx}.signs")
            name = "g(" + ",".join(f"{s:+d}" for s in signs) + ")"
            jobs.append((name, None, signs))
    seed = _seed_of(tree, seed)

    if dry_run:
        _print_timing(protocol)
        return []
    rng = RngStream(seed)
    source = source_for_spectrum(spectrum)
    rows = []
    for i, (name, axes, signs) in enumerate(jobs):
        stream = rng.shifted(i << 20)
        if axes is not None:
            est = correlator_axes(protocol, source, n_traj, stream, mode=mode,
                                  axes=axes, dt=dt, threads=threads)
        else:
            est = correlator_g(protocol, signs, source, n_traj, stream,
                               dt=dt, threads=threads)
        rows.append((name, est.mean.real, est.mean.imag, est.std_error,
                     est.n_traj))
    out = os.path.join(out_dir, tree.get("output", "correlators.csv"))
    _write_csv(out, ["name", "re_mean", "im_mean", "std_error", "n_traj"],
               rows)
    return [os.path.basename(out)]


@main.command("simulate")
@common_options
def simulate_cmd(config_path, seed, threads, out_dir, dry_run):
    """Monte Carlo correlators of one measurement protocol."""
    _run("simulate", _do_simulate, config_path, seed, threads, out_dir,
         dry_run)


# ---------------------------------------------------------------------------
# chi-scan: analytic chi(omega_p) for both protocol families
# ---------------------------------------------------------------------------

def _do_chi_scan(tree, seed, threads, out_dir, dry_run):
    check_keys(tree, {"experiment", "spectrum", "N", "tau", "omega_p_min",
                      "omega_p_max", "omega_p_steps", "seed"},
               {"spectrum", "N", "tau", "omega_p_min", "omega_p_max",
                "omega_p_steps"}, "config")
    spectrum = build_spectrum(tree["spectrum"])
    n_blocks = tree["N"]
    if not isinstance(n_blocks, int) or n_blocks < 1:
        raise ConfigurationError("config.N must be a positive integer")
    tau = float(tree["tau"])
    if tau <= 0:
        raise ConfigurationError("config.tau must be positive")
    grid = _grid(tree, "config")
    comb_timing(float(grid[-1]), tau)  # validates tau < pi/omega_p everywhere

    if dry_run:
        t, d = comb_timing(float(grid[0]), tau)
        _print_timing(
            build_protocol({"tau": t, "delta": d, "N": n_blocks}))
        return []
    artifacts = []
    for family in ("measurement", "dd"):
        scn = run_scan(family, spectrum, grid,
                       tau=tau if family == "measurement" else 0.0,
                       n_blocks=n_blocks)
        out = os.path.join(out_dir, f"chi_scan_{family}.csv")
        _write_csv(out, ["omega_p", "chi", "W"],
                   zip(scn.omega_p, scn.chi, scn.w))
        artifacts.append(os.path.basename(out))
    return artifacts


@main.command("chi-scan")
@common_options
def chi_scan_cmd(config_path, seed, threads, out_dir, dry_run):
    """Analytic chi(omega_p) scans for measurement and DD combs."""
    _run("chi-scan", _do_chi_scan, config_path, seed, threads, out_dir,
         dry_run)


# ---------------------------------------------------------------------------
# scan: one family, analytic or Monte Carlo
# ---------------------------------------------------------------------------

def _do_scan(tree, seed, threads, out_dir, dry_run):
    check_keys(tree, {"experiment", "spectrum", "family", "N", "tau",
                      "omega_p_min", "omega_p_max", "omega_p_steps", "mode",
                      "n_traj", "seed", "output"},
               {"spectrum", "family", "N", "tau", "omega_p_min",
                "omega_p_max", "omega_p_steps"}, "config")
    spectrum = build_spectrum(tree["spectrum"])
    family = tree["family"]
    if family not in ("measurement", "dd"):
        raise ConfigurationError("config.family must be 'measurement' or 'dd'")
    n_blocks = tree["N"]
    if not isinstance(n_blocks, int) or n_blocks < 1:
        raise ConfigurationError("config.N must be a positive integer")
    tau = float(tree["tau"])
    if tau < 0 or (family == "measurement" and tau == 0):
        raise ConfigurationError("config.tau must be positive")
    grid = _grid(tree, "config")
    if family == "measurement":
        comb_timing(float(grid[-1]), tau)
    mode = tree.get("mode", "analytic")
    if mode not in ("analytic", "mc"):
        raise ConfigurationError("config.mode must be 'analytic' or 'mc'")
    n_traj = tree.get("n_traj", 10_000)
    if not isinstance(n_traj, int) or n_traj < 2:
        raise ConfigurationError("config.n_traj must be an integer >= 2")
    seed = _seed_of(tree, seed)

    if dry_run:
        t, d = ((tau, math.pi / float(grid[0]) - tau)
                if family == "measurement"
                else (math.pi / float(grid[0]), 0.0))
        _print_timing(build_protocol({"tau": t, "delta": d, "N": n_blocks}))
        return []
    scn = run_scan(family, spectrum, grid, tau=tau, n_blocks=n_blocks,
                   mode=mode, n_traj=n_traj, rng=RngStream(seed),
                   threads=threads)
    out = os.path.join(out_dir, tree.get("output", f"scan_{family}.csv"))
    _write_csv(out, ["omega_p", "chi", "W", "mode"],
               zip(scn.omega_p, scn.chi, scn.w, scn.point_mode))
    return [os.path.basename(out)]


@main.command("scan")
@common_options
def scan_cmd(config_path, seed, threads, out_dir, dry_run):
    """chi(omega_p) scan for one comb family (analytic or Monte Carlo)."""
    _run("scan", _do_scan, config_path, seed, threads, out_dir, dry_run)


# ---------------------------------------------------------------------------
# reconstruct: linear inversion of decay rates for S
# ---------------------------------------------------------------------------

def _do_reconstruct(tree, seed, threads, out_dir, dry_run):
    check_keys(tree, {"experiment", "spectrum", "tau", "m0", "omega_p_min",
                      "omega_p_max", "omega_p_steps", "rates_csv", "node_cap",
                      "seed", "output"},
               {"spectrum", "tau", "m0", "omega_p_min", "omega_p_max",
                "omega_p_steps"}, "config")
    spectrum = build_spectrum(tree["spectrum"])
    tau = float(tree["tau"])
    if tau <= 0:
        raise ConfigurationError("config.tau must be positive")
    m0 = tree["m0"]
    if not isinstance(m0, int) or m0 < 1:
        raise ConfigurationError("config.m0 must be a positive integer")
    grid = _grid(tree, "config")
    comb_timing(float(grid[-1]), tau)
    node_cap = tree.get("node_cap")
    if node_cap is not None:
        node_cap = float(node_cap)

    if dry_run:
        t, d = comb_timing(float(grid[0]), tau)
        _print_timing(build_protocol({"tau": t, "delta": d, "N": 1}))
        return []
    if "rates_csv" in tree:
        with open(tree["rates_csv"], "r", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != ["omega_p", "rate"]:
                raise ConfigurationError(
                    "config.rates_csv must have header omega_p,rate"
                )
            pairs = [(float(r["omega_p"]), float(r["rate"])) for r in reader]
        grid = np.array([p[0] for p in pairs])
        rates = np.array([p[1] for p in pairs])
    else:
        rates = np.array([
            decay_rate(tau, math.pi / wp - tau, spectrum, m_max=m0).rate
            for wp in grid
        ])
    rec = reconstruct(grid, rates, tau, m0, node_cap=node_cap)
    s_model = spectrum.psd(rec.frequencies)
    out = os.path.join(out_dir, tree.get("output", "reconstruction.csv"))
    _write_csv(out, ["omega", "S_est", "S_model", "residual"],
               [(w, s, m, rec.residual)
                for w, s, m in zip(rec.frequencies, rec.s_values, s_model)])
    return [os.path.basename(out)]


@main.command("reconstruct")
@common_options
def reconstruct_cmd(config_path, seed, threads, out_dir, dry_run):
    """Recover S(omega) at comb nodes from decay rates."""
    _run("reconstruct", _do_reconstruct, config_path, seed, threads, out_dir,
         dry_run)


# ---------------------------------------------------------------------------
# witness: non-Gaussianity sweep over total CP-2 time
# ---------------------------------------------------------------------------

def _do_witness(tree, seed, threads, out_dir, dry_run):
    check_keys(tree, {"experiment", "sigma", "tau_c", "v2", "t_min", "t_max",
                      "t_steps", "n_traj", "seed", "output"},
               {"sigma", "tau_c", "v2", "t_min", "t_max", "t_steps",
                "n_traj"}, "config")
    sigma = float(tree["sigma"])
    tau_c = float(tree["tau_c"])
    v2 = float(tree["v2"])
    if sigma <= 0 or tau_c <= 0:
        raise ConfigurationError("config.sigma and config.tau_c must be positive")
    t_lo, t_hi = float(tree["t_min"]), float(tree["t_max"])
    steps = tree["t_steps"]
    if not isinstance(steps, int) or steps < 1:
        raise ConfigurationError("config.t_steps must be a positive integer")
    if not 0 < t_lo <= t_hi:
        raise ConfigurationError("config.t_min/t_max must satisfy 0 < min <= max")
    n_traj = tree["n_traj"]
    if not isinstance(n_traj, int) or n_traj < 2:
        raise ConfigurationError("config.n_traj must be an integer >= 2")
    seed = _seed_of(tree, seed)
    totals = np.geomspace(t_lo, t_hi, steps)

    if dry_run:
        from .nongaussian import cp2_protocol
        _print_timing(cp2_protocol(totals[0] / 4.0))
        return []
    points = cp2_witness_sweep(totals, sigma, tau_c, v2, n_traj,
                               RngStream(seed), threads=threads)
    out = os.path.join(out_dir, tree.get("output", "witness.csv"))
    _write_csv(out, ["T", "re_W", "im_W", "se_re", "se_im", "W_gauss2",
                     "verdict"],
               [(p.total_time, p.g.mean.real, p.g.mean.imag,
                 p.g.std_error, p.g.std_error, p.w_gauss2, p.verdict)
                for p in points])
    return [os.path.basename(out)]


@main.command("witness")
@common_options
def witness_cmd(config_path, seed, threads, out_dir, dry_run):
    """CP-2 non-Gaussianity witness sweep for quadratic-OU noise."""
    _run("witness", _do_witness, config_path, seed, threads, out_dir, dry_run)


# ---------------------------------------------------------------------------
# filter-dump: f(t) breakpoints and |f~(omega)|^2 scan
# ---------------------------------------------------------------------------

def _do_filter_dump(tree, seed, threads, out_dir, dry_run):
    check_keys(tree, {"experiment", "protocol", "signs", "omega_max",
                      "omega_steps", "spectrum", "seed"},
               {"protocol", "omega_max", "omega_steps"}, "config")
    protocol = build_protocol(tree["protocol"])
    if "signs" in tree:
        signs = build_signs(tree["signs"], protocol.n, "config.signs")
    else:
        signs = alternating_signs(protocol.n)
    omega_max = float(tree["omega_max"])
    if omega_max <= 0:
        raise ConfigurationError("config.omega_max must be positive")
    steps = tree["omega_steps"]
    if not isinstance(steps, int) or steps < 2:
        raise ConfigurationError("config.omega_steps must be an int >= 2")
    spectrum = (build_spectrum(tree["spectrum"]) if "spectrum" in tree
                else None)

    if dry_run:
        _print_timing(protocol)
        return []
    filt = build_filter(protocol, signs)
    bp = os.path.join(out_dir, "filter_breakpoints.csv")
    # piecewise-constant steps: value v_i holds on [b_i, b_{i+1})
    _write_csv(bp, ["t", "f"],
               list(zip(filt.breakpoints[:-1], filt.values))
               + [(filt.breakpoints[-1], 0.0)])
    grid = np.linspace(0.0, omega_max, steps)
    power = filter_power(filt, grid)
    sc = os.path.join(out_dir, "filter_power.csv")
    _write_csv(sc, ["omega", "f2"], zip(grid, power))
    artifacts = [os.path.basename(bp), os.path.basename(sc)]
    if spectrum is not None:
        sp = os.path.join(out_dir, "spectrum.csv")
        _write_csv(sp, ["omega", "S"], zip(grid, spectrum.psd(grid)))
        artifacts.append(os.path.basename(sp))
    return artifacts


@main.command("filter-dump")
@common_options
def filter_dump_cmd(config_path, seed, threads, out_dir, dry_run):
    """Dump filter breakpoints and the squared Fourier magnitude."""
    _run("filter-dump", _do_filter_dump, config_path, seed, threads, out_dir,
         dry_run)


if __name__ == "__main__":
    main()
