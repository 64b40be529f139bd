"""Closed-form / quadrature decoherence for Gaussian noise.

The attenuation exponent is chi = int_0^inf S(w) |f~(w)|^2 dw / 2pi.  The
integrand oscillates on the scale 2pi/T set by the filter duration, so it
is integrated on half-period panels with fixed-order Gauss-Legendre rules;
ideal white components use the exact Parseval value and unresolved narrow
peaks are sifted analytically.
"""
from __future__ import annotations

import cmath
import dataclasses
import math

import numpy as np

from .filters import (MeasurementProtocol, PiecewiseFilter, Segment,
                      SignPattern, build_filter, comb_coefficient,
                      filter_power)
from .noise import (ConfigurationError, Lorentzian, NarrowPeak, PowerLaw,
                    SpectrumModel, White)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

# narrow-peak features sharper than this fraction of the filter bandwidth
# are handled by delta-function sifting instead of quadrature
PEAK_SIFT_THRESHOLD = 0.1


class QuadratureError(RuntimeError):
    """Non-convergent attenuation integral; try a finer subdivision."""


@dataclasses.dataclass(frozen=True)
class AttenuationResult:
    chi: float
    phase: float
    quadrature_error: float

    @property
    def coherence(self) -> complex:
        return cmath.exp(1j * self.phase - self.chi)


def _panel_quadrature(func, lo: float, hi: float, panel_width: float) -> float:
    """Integrate func over [lo, hi] on panels of at most panel_width."""
    if hi <= lo:
        return 0.0
    n_panels = max(1, int(math.ceil((hi - lo) / panel_width)))
    if n_panels > 2_000_000:
        raise QuadratureError(
            f"attenuation integral needs {n_panels} panels over [{lo:g}, {hi:g}];"
            " subdivide the spectrum or reduce the integration band"
        )
    edges = np.linspace(lo, hi, n_panels + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    # all nodes of all panels in one vectorized evaluation
    pts = (centers[:, None] + half * _GL_NODES[None, :]).ravel()
    vals = func(pts).reshape(n_panels, -1)
    return float((half * (vals @ _GL_WEIGHTS)).sum())


def _component_chi(comp, filt: PiecewiseFilter, rel_tol: float) -> tuple[float, float]:
    """(chi contribution, error estimate) for a single spectrum component."""
    total_t = filt.total_duration
    panel = math.pi / total_t
    n_on = sum(1 for v in filt.values if v != 0)

    if isinstance(comp, White) and comp.cutoff is None:
        # exact Parseval: chi = (level/2) int f^2 dt
        return (0.5 * comp.level * filt.square_integral(), 0.0)

    if isinstance(comp, NarrowPeak) and comp.width * total_t < PEAK_SIFT_THRESHOLD:
        chi = comp.weight * float(filter_power(filt, comp.center)) / (2.0 * math.pi)
        return (chi, 0.0)

    def integrand(w):
        return comp.psd(w) * filter_power(filt, w) / (2.0 * math.pi)

    lo, hi = comp.band
    if isinstance(comp, NarrowPeak):
        # resolved peak: cover the Lorentzian tails (mass ~ width/x beyond
        # +-x) and refine the panels below the lineshape width
        lo = max(0.0, comp.center - 200.0 * comp.width)
        hi = comp.center + 200.0 * comp.width
        panel = min(panel, comp.width / 4.0)
    if isinstance(comp, (White, PowerLaw)):
        # hard band edges: the integral is fully contained
        return (_panel_quadrature(integrand, lo, hi, panel), 0.0)

    # open-ended components (Lorentzian, resolved NarrowPeak): extend the
    # upper limit until the Parseval-style tail bound is negligible.
    # |f~(w)|^2 <= 4 n_on^2 / w^2 and S decreasing beyond the band give
    # tail <= (4 n_on^2 / 2pi) S(w_hi) / w_hi.
    chi = _panel_quadrature(integrand, lo, hi, panel)
    for _ in range(60):
        # two bounds for int_hi^inf S |f~|^2 dw/2pi with S decreasing:
        # the |f~| <= 2 n_on / w envelope, and Parseval with S(hi) out front
        tail_bound = float(comp.psd(hi)) * min(
            4.0 * n_on**2 / (2.0 * math.pi * hi),
            0.5 * filt.square_integral())
        if tail_bound <= rel_tol * max(chi, 1e-300) or tail_bound < 1e-16:
            return (chi, tail_bound)
        new_hi = 2.0 * hi
        chi += _panel_quadrature(integrand, hi, new_hi, panel)
        hi = new_hi
    raise QuadratureError(
        "attenuation tail did not converge; the spectrum decays too slowly"
    )


def chi_overlap(filt: PiecewiseFilter, spectrum: SpectrumModel,
                omega: float = 0.0, rel_tol: float = 1e-6) -> AttenuationResult:
    """Overlap chi = int_0^inf S(w)|f~(w)|^2 dw/2pi, plus deterministic phase.

    The phase is omega * int f dt = Omega sum_k s_k tau_k.
    """
    chi = 0.0
    err = 0.0
    for comp in spectrum.components:
        c, e = _component_chi(comp, filt, rel_tol)
        chi += c
        err += e
    return AttenuationResult(chi=chi, phase=omega * filt.integral(),
                             quadrature_error=err)


def g_gaussian(protocol: MeasurementProtocol, signs: SignPattern,
               spectrum: SpectrumModel, rel_tol: float = 1e-6) -> complex:
    """g(s_1,...,s_n) = e^{i Omega sum s_k tau_k} e^{-chi} for Gaussian noise."""
    filt = build_filter(protocol, signs)
    return chi_overlap(filt, spectrum, omega=protocol.omega,
                       rel_tol=rel_tol).coherence


def cxx_two_measurement(tau: float, delta: float, omega: float,
                        spectrum: SpectrumModel) -> float:
    """C_xx(tau,tau; tau+delta, tau) = cos(2 Omega tau) e^{-chi11}/2 + e^{-chi1m}/2."""
    if tau <= 0:
        raise ConfigurationError("tau must be positive")
    if delta < 0:
        raise ConfigurationError("delta must be >= 0")
    protocol = MeasurementProtocol((Segment(tau, delta), Segment(tau)), omega)
    chi_pp = chi_overlap(build_filter(protocol, SignPattern((1, 1))), spectrum).chi
    chi_pm = chi_overlap(build_filter(protocol, SignPattern((1, -1))), spectrum).chi
    return 0.5 * math.cos(2.0 * omega * tau) * math.exp(-chi_pp) \
        + 0.5 * math.exp(-chi_pm)


@dataclasses.dataclass(frozen=True)
class DecayRate:
    rate: float
    truncation_bound: float
    omega_p: float


def decay_rate(tau: float, delta: float, spectrum: SpectrumModel,
               m_max: int) -> DecayRate:
    """Comb decay rate R(w_p) = sum_{m>0 odd} |c_m|^2 S(m w_p).

    Truncated at m_max; the remainder bound uses |c_m|^2 <= 4/(pi m)^2 and
    the largest spectrum value past the truncation harmonic.
    """
    if m_max < 1:
        raise ConfigurationError("m_max must be >= 1")
    w_p = math.pi / (tau + delta)
    ms = np.arange(1, m_max + 1, 2)
    c2 = np.array([abs(comb_coefficient(int(m), tau, delta)) ** 2 for m in ms])
    s_vals = spectrum.psd(ms * w_p)
    rate = float(c2 @ s_vals)
    tail_m = np.arange(m_max + 1, m_max + 200, 2)
    s_tail_max = float(np.max(spectrum.psd(tail_m * w_p))) if len(tail_m) else 0.0
    # sum_{odd m > m_max} 1/m^2 ~ 1/(2 m_max)
    bound = s_tail_max * (4.0 / math.pi**2) / (2.0 * m_max)
    return DecayRate(rate=rate, truncation_bound=bound, omega_p=w_p)
