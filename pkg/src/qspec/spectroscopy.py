"""Frequency-comb spectroscopy: omega_p scans, inversion for S, peak finding.

A scan varies the comb base frequency omega_p = pi/(tau + delta) (for the
measurement family, tau is held fixed and the dead time absorbs the change;
for dynamical decoupling the interpulse spacing is pi/omega_p).  Decay
rates on an omega_p grid are inverted for S(m omega_p) by non-negative
least squares on a snapped node grid.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np
import scipy.optimize

from .filters import (MeasurementProtocol, PiecewiseFilter, alternating_signs,
                      build_filter, comb_coefficient, comb_protocol, dd_filter)
from .gaussianchi import chi_overlap
from .montecarlo import correlator_g, source_for_spectrum
from .noise import ConfigurationError, NarrowPeak, RngStream, SpectrumModel

MEASUREMENT = "measurement"
DD = "dd"


def comb_timing(omega_p: float, tau: float) -> tuple[float, float]:
    """(tau, delta) of the measurement comb block with base frequency omega_p."""
    delta = math.pi / omega_p - tau
    if delta < 0:
        raise ConfigurationError(
            f"tau={tau:g} exceeds the half-block pi/omega_p at omega_p={omega_p:g}"
        )
    return (tau, delta)


def comb_filter(family: str, omega_p: float, tau: float,
                n_blocks: int) -> PiecewiseFilter:
    """The N-block filter of either protocol family at base frequency omega_p."""
    if family == MEASUREMENT:
        tau, delta = comb_timing(omega_p, tau)
        protocol = comb_protocol(tau, delta, n_blocks)
        return build_filter(protocol, alternating_signs(2 * n_blocks))
    if family == DD:
        interpulse = math.pi / omega_p
        total = 2 * n_blocks * interpulse
        pulses = [k * interpulse for k in range(1, 2 * n_blocks)]
        return dd_filter(pulses, total)
    raise ConfigurationError(f"unknown protocol family {family!r}")


@dataclasses.dataclass(frozen=True)
class SpectroscopyScan:
    omega_p: np.ndarray
    chi: np.ndarray
    w: np.ndarray
    family: str
    n_blocks: int
    tau: float
    point_mode: tuple[str, ...]

    def __post_init__(self):
        wp = np.asarray(self.omega_p, dtype=float)
        if np.any(np.diff(wp) <= 0):
            raise ConfigurationError("omega_p grid must be strictly increasing")


def scan(family: str, spectrum: SpectrumModel, omega_p_grid, tau: float,
         n_blocks: int, mode: str = "analytic", n_traj: int = 10_000,
         rng: RngStream | None = None, threads: int = 1) -> SpectroscopyScan:
    """chi(omega_p) and W = exp(-chi) over a base-frequency grid.

    ``mode='analytic'`` uses exact quadrature; ``mode='mc'`` estimates
    |g| by Monte Carlo and reports chi = -ln|g| with the log-of-noisy-mean
    bias correction.  MC points whose |g| is below 3 standard errors of
    zero are marked unmeasurable (chi = inf, W = 0).
    """
    omega_p_grid = np.asarray(omega_p_grid, dtype=float)
    chis = np.empty(len(omega_p_grid))
    modes: list[str] = []
    for i, wp in enumerate(omega_p_grid):
        if mode == "analytic":
            filt = comb_filter(family, wp, tau, n_blocks)
            chis[i] = chi_overlap(filt, spectrum).chi
            modes.append("analytic")
            continue
        if mode != "mc":
            raise ConfigurationError(f"unknown scan mode {mode!r}")
        if rng is None:
            raise ConfigurationError("mc mode needs an RngStream")
        if family == MEASUREMENT:
            t, d = comb_timing(wp, tau)
        else:
            t, d = (math.pi / wp, 0.0)
        protocol = comb_protocol(t, d, n_blocks)
        source = source_for_spectrum(spectrum)
        est = correlator_g(protocol, alternating_signs(2 * n_blocks), source,
                           n_traj, rng.shifted(i << 20), threads=threads)
        mag = abs(est.mean)
        if mag < 3.0 * est.std_error:
            chis[i] = math.inf
            modes.append("unmeasurable")
        else:
            chis[i] = -math.log(mag) + est.std_error**2 / (2.0 * mag**2)
            modes.append("mc")
    return SpectroscopyScan(omega_p=omega_p_grid, chi=chis,
                            w=np.exp(-chis), family=family,
                            n_blocks=n_blocks, tau=tau,
                            point_mode=tuple(modes))


# ---------------------------------------------------------------------------
# Spectrum reconstruction (Alvarez-Suter-style linear inversion)
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class ReconstructionResult:
    frequencies: np.ndarray
    s_values: np.ndarray
    residual: float
    m0: int


def reconstruct(omega_p, rates, tau: float, m0: int,
                node_cap: float | None = None) -> ReconstructionResult:
    """Invert R(omega_p) = sum_{m>0 odd} |c_m|^2 S(m omega_p) for S.

    Harmonics m omega_p are snapped onto a common node grid (merged within
    half the smallest omega_p spacing); harmonics above ``node_cap``
    (default: the highest omega_p) are assumed to see negligible S and are
    dropped, which keeps the non-negative least-squares system square-ish
    and well posed.
    """
    omega_p = np.asarray(omega_p, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if len(omega_p) != len(rates) or len(omega_p) < 2:
        raise ConfigurationError("need matching omega_p and rate arrays (>= 2 points)")
    if m0 < 1:
        raise ConfigurationError("m0 must be >= 1")
    if node_cap is None:
        node_cap = float(np.max(omega_p))
    tol = 0.5 * float(np.min(np.diff(np.sort(omega_p))))

    # collect and cluster node frequencies
    raw_nodes: list[float] = []
    for wp in omega_p:
        for m in range(1, m0 + 1, 2):
            node = m * wp
            if node <= node_cap + tol:
                raw_nodes.append(node)
    if not raw_nodes:
        raise ConfigurationError(
            f"node_cap={node_cap:g} excludes every comb harmonic"
        )
    raw_nodes.sort()
    clusters: list[list[float]] = []
    for node in raw_nodes:
        if clusters and node - clusters[-1][0] <= tol:
            clusters[-1].append(node)
        else:
            clusters.append([node])
    nodes = np.array([float(np.mean(c)) for c in clusters])

    def node_index(value: float) -> int:
        idx = int(np.argmin(np.abs(nodes - value)))
        return idx if abs(nodes[idx] - value) <= tol else -1

    a = np.zeros((len(omega_p), len(nodes)))
    for i, wp in enumerate(omega_p):
        _, delta = comb_timing(wp, tau)
        for m in range(1, m0 + 1, 2):
            node = m * wp
            if node > node_cap + tol:
                continue
            j = node_index(node)
            if j >= 0:
                a[i, j] += abs(comb_coefficient(m, tau, delta)) ** 2
    cond = np.linalg.cond(a)
    if cond > 1e8:
        raise ConfigurationError(
            f"reconstruction system is ill-conditioned (cond={cond:.2e}); "
            "use a denser omega_p grid or a smaller m0"
        )
    s_est, residual = scipy.optimize.nnls(a, rates)
    return ReconstructionResult(frequencies=nodes, s_values=s_est,
                                residual=float(residual), m0=m0)


# ---------------------------------------------------------------------------
# Peak localization and clock-jitter smearing
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class PeakLocalization:
    localizable: bool
    omega_hat: float
    resolution: float
    scan: SpectroscopyScan


def _fwhm(omega: np.ndarray, chi: np.ndarray, peak_idx: int,
          background: float) -> float:
    half = background + 0.5 * (chi[peak_idx] - background)
    lo = omega[0]
    for i in range(peak_idx, 0, -1):
        if chi[i - 1] < half:
            frac = (half - chi[i - 1]) / (chi[i] - chi[i - 1])
            lo = omega[i - 1] + frac * (omega[i] - omega[i - 1])
            break
    hi = omega[-1]
    for i in range(peak_idx, len(chi) - 1):
        if chi[i + 1] < half:
            frac = (chi[i] - half) / (chi[i] - chi[i + 1])
            hi = omega[i] + frac * (omega[i + 1] - omega[i])
            break
    return hi - lo


def peak_localization(spectrum: SpectrumModel, family: str, total_time: float,
                      tau_ratio: float = 0.01,
                      band: tuple[float, float] | None = None,
                      scan_noise: float = 0.0) -> PeakLocalization:
    """Locate a sharp spectral feature by scanning omega_p at fixed total time.

    Per scan point the block count is chosen so the protocol lasts
    ``total_time``; for the measurement family the evolution time is
    ``tau_ratio`` of the block period.  The band defaults to +-30% around
    the sharpest NarrowPeak component.
    """
    if band is None:
        peaks = [c for c in spectrum.components if isinstance(c, NarrowPeak)]
        if not peaks:
            raise ConfigurationError(
                "no NarrowPeak component and no explicit search band"
            )
        center = min(peaks, key=lambda c: c.width).center
        band = (0.7 * center, 1.3 * center)
    step = (2.0 * math.pi / total_time) / 6.0
    grid = np.arange(band[0], band[1] + step, step)
    chis = np.empty(len(grid))
    for i, wp in enumerate(grid):
        t_block = 2.0 * math.pi / wp
        n_blocks = max(1, round(total_time / t_block))
        tau = tau_ratio * t_block if family == MEASUREMENT else 0.0
        filt = comb_filter(family, wp, tau, n_blocks)
        chis[i] = chi_overlap(filt, spectrum).chi
    scn = SpectroscopyScan(omega_p=grid, chi=chis, w=np.exp(-chis),
                           family=family, n_blocks=0, tau=0.0,
                           point_mode=tuple("analytic" for _ in grid))
    background = float(np.median(chis))
    peak_idx = int(np.argmax(chis))
    threshold = max(3.0 * scan_noise, 0.35 * abs(background) + 1e-12)
    if chis[peak_idx] - background < threshold:
        return PeakLocalization(False, math.nan, math.nan, scn)
    return PeakLocalization(True, float(grid[peak_idx]),
                            _fwhm(grid, chis, peak_idx, background), scn)


def jitter_smear(scn: SpectroscopyScan, spectrum: SpectrumModel,
                 sigma_dt: float, n_samples: int = 64,
                 rng: RngStream | None = None) -> SpectroscopyScan:
    """Average W over Gaussian dead-time jitter (clock instability model).

    Each scan point's dead time is redrawn from N(delta, sigma_dt^2),
    clipped at zero, and W is averaged over the jittered protocols.
    Measurement-family scans only.
    """
    if sigma_dt < 0:
        raise ConfigurationError("sigma_dt must be >= 0")
    if scn.family != MEASUREMENT:
        raise ConfigurationError("jitter smearing applies to measurement scans")
    if sigma_dt == 0.0:
        return scn
    if rng is None:
        rng = RngStream(0, 0)
    gen = rng.generator()
    w_out = np.empty(len(scn.omega_p))
    for i, wp in enumerate(scn.omega_p):
        tau, delta = comb_timing(wp, scn.tau)
        draws = np.clip(gen.normal(delta, sigma_dt, size=n_samples), 0.0, None)
        w_acc = 0.0
        for d in draws:
            protocol = comb_protocol(tau, d, scn.n_blocks)
            filt = build_filter(protocol, alternating_signs(2 * scn.n_blocks))
            w_acc += math.exp(-chi_overlap(filt, spectrum).chi)
        w_out[i] = w_acc / n_samples
    chi_out = -np.log(np.maximum(w_out, 1e-300))
    return SpectroscopyScan(omega_p=scn.omega_p, chi=chi_out, w=w_out,
                            family=scn.family, n_blocks=scn.n_blocks,
                            tau=scn.tau, point_mode=scn.point_mode)
