"""Trajectory-level simulation of measurement protocols.

Each trajectory yields the per-segment phases Phi_k; correlators are
averaged either analytically per trajectory (the outcome sums collapse to
products of cos/sin, which is the low-variance default) or by sampling
projective outcomes.  Batches own independent RNG streams, so results are
reproducible and independent of the worker count.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .filters import (MeasurementProtocol, Segment, SignPattern,
                      alternating_signs)
from .gaussianchi import g_gaussian
from .noise import (ConfigurationError, Lorentzian, NoiseSource,
                    NoiseTrajectory, OUSource, RngStream, SpectrumModel,
                    SpectrumSource)

DEFAULT_N_BATCHES = 100


@dataclasses.dataclass(frozen=True)
class PhaseVector:
    """Noise-induced rotation angles Phi_k, one per protocol segment."""

    phases: np.ndarray


@dataclasses.dataclass(frozen=True)
class CorrelatorEstimate:
    mean: complex
    std_error: float
    n_traj: int
    n_shots_per_traj: int = 1
    mode: str = "analytic_per_trajectory"

    @property
    def real(self) -> float:
        return self.mean.real

    def z_score(self, reference: complex = 0.0) -> float:
        return abs(self.mean - reference) / self.std_error


def segment_phases(samples: np.ndarray, dt: float,
                   intervals: list[tuple[float, float]]) -> np.ndarray:
    """Trapezoidal integrals of piecewise-linear trajectories over windows.

    ``samples`` has shape (n_traj, n).  Off-grid endpoints use the exact
    integral of the linear interpolant, so the result is exact for
    piecewise-linear noise.
    """
    samples = np.atleast_2d(samples)
    n = samples.shape[1]
    span = dt * (n - 1)
    for a, b in intervals:
        if a < -1e-12 or b > span + 1e-9:
            raise ConfigurationError(
                f"trajectory spans [0, {span:g}] but segment needs [{a:g}, {b:g}]"
            )
    # cumulative trapezoid on the grid
    mids = 0.5 * (samples[:, 1:] + samples[:, :-1]) * dt
    cum = np.concatenate([np.zeros((samples.shape[0], 1)), np.cumsum(mids, axis=1)],
                         axis=1)

    def cum_at(x: float) -> np.ndarray:
        x = min(max(x, 0.0), span)
        i = min(int(x / dt), n - 2)
        h = x - i * dt
        xi0 = samples[:, i]
        xi1 = samples[:, i + 1]
        return cum[:, i] + xi0 * h + (xi1 - xi0) * h * h / (2.0 * dt)

    out = np.empty((samples.shape[0], len(intervals)))
    for k, (a, b) in enumerate(intervals):
        out[:, k] = cum_at(b) - cum_at(a)
    return out


def phases(traj: NoiseTrajectory, protocol: MeasurementProtocol) -> PhaseVector:
    """Phi_k = int_{t_k - tau_k}^{t_k} xi(t) dt on the trajectory grid."""
    vals = segment_phases(traj.samples[None, :], traj.dt, protocol.intervals)
    return PhaseVector(phases=vals[0])


def protocol_dt(protocol: MeasurementProtocol, source: NoiseSource) -> float:
    """Default grid step: resolves the noise and the shortest segment."""
    taus = [s.tau for s in protocol.segments]
    deltas = [s.delta for s in protocol.segments if s.delta > 0]
    tau_min = min(taus + deltas)
    return source.recommended_dt(tau_min)


def _batch_sizes(n_traj: int, n_batches: int) -> list[int]:
    base = n_traj // n_batches
    rem = n_traj % n_batches
    return [base + (1 if i < rem else 0) for i in range(n_batches)]


def _map_ordered(fn, args, threads: int):
    if threads <= 1:
        return [fn(a) for a in args]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, args))


def _estimate_from_batches(batch_means: list[complex], batch_sizes: list[int],
                           n_shots: int, mode: str) -> CorrelatorEstimate:
    means = np.asarray(batch_means, dtype=complex)
    sizes = np.asarray(batch_sizes, dtype=float)
    total = sizes.sum()
    mean = complex(np.sum(means * sizes) / total)
    nb = len(means)
    if nb < 2:
        raise ConfigurationError("need at least 2 batches for a standard error")
    se_re = float(np.std(means.real, ddof=1)) / math.sqrt(nb)
    se_im = float(np.std(means.imag, ddof=1)) / math.sqrt(nb)
    se = math.hypot(se_re, se_im)
    return CorrelatorEstimate(mean=mean, std_error=max(se, 1e-300),
                              n_traj=int(total), n_shots_per_traj=n_shots,
                               mode=mode)


def alpha_ensemble(protocol: MeasurementProtocol, source: NoiseSource,
                   n_traj: int, rng: RngStream, dt: float | None = None,
                   n_batches: int = DEFAULT_N_BATCHES, threads: int = 1,
                   ) -> list[np.ndarray]:
    """Per-batch arrays of measured angles alpha_k = Omega tau_k + Phi_k.

    Returned as a list (one array of shape (batch, n) per batch) so that
    several estimators can share one trajectory ensemble for paired tests.
    """
    if n_traj < 2:
        raise ConfigurationError("n_traj must be >= 2")
    if dt is None:
        dt = protocol_dt(protocol, source)
    n_batches = min(n_batches, n_traj)
    sizes = _batch_sizes(n_traj, n_batches)
    duration = protocol.total_duration
    intervals = protocol.intervals
    det = protocol.omega * np.array([s.tau for s in protocol.segments])

    def one_batch(args):
        index, size = args
        samples = source.ensemble(duration, dt, size, rng.shifted(index))
        return segment_phases(samples, dt, intervals) + det

    return _map_ordered(one_batch, list(enumerate(sizes)), threads)


def _axis_product_analytic(alphas: np.ndarray, axes: str) -> np.ndarray:
    prod = np.ones(alphas.shape[0])
    for k, axis in enumerate(axes):
        prod *= np.cos(alphas[:, k]) if axis == "x" else np.sin(alphas[:, k])
    return prod


def _axis_product_sampled(alphas: np.ndarray, axes: str,
                          gen: np.random.Generator) -> np.ndarray:
    prod = np.ones(alphas.shape[0])
    for k, axis in enumerate(axes):
        e = np.cos(alphas[:, k]) if axis == "x" else np.sin(alphas[:, k])
        p_plus = 0.5 * (1.0 + e)
        m = np.where(gen.random(alphas.shape[0]) < p_plus, 1.0, -1.0)
        prod *= m
    return prod


def correlator_axes(protocol: MeasurementProtocol, source: NoiseSource,
                    n_traj: int, rng: RngStream,
                    mode: str = "analytic_per_trajectory",
                    axes: str | None = None, dt: float | None = None,
                    threads: int = 1,
                    batches: list[np.ndarray] | None = None,
                    ) -> CorrelatorEstimate:
    """C_{a_1...a_n} = <e_{a_1}(alpha_1) ... e_{a_n}(alpha_n)>.

    ``batches`` allows reuse of a shared alpha ensemble from
    :func:`alpha_ensemble`; outcome sampling then draws from a stream
    derived from ``rng`` shifted far away from the trajectory streams.
    """
    if mode not in ("analytic_per_trajectory", "sampled_outcomes"):
        raise ConfigurationError(f"unknown estimator mode {mode!r}")
    if axes is None:
        axes = protocol.axes
    if batches is None:
        batches = alpha_ensemble(protocol, source, n_traj, rng, dt=dt,
                                 threads=threads)
    means = []
    sizes = []
    for index, alphas in enumerate(batches):
        if mode == "analytic_per_trajectory":
            vals = _axis_product_analytic(alphas, axes)
        else:
            gen = rng.shifted((1 << 50) + index).generator()
            vals = _axis_product_sampled(alphas, axes, gen)
        means.append(complex(vals.mean()))
        sizes.append(alphas.shape[0])
    return _estimate_from_batches(means, sizes, 1, mode)


def correlator_g(protocol: MeasurementProtocol, signs: SignPattern,
                 source: NoiseSource, n_traj: int, rng: RngStream,
                 dt: float | None = None, threads: int = 1,
                 batches: list[np.ndarray] | None = None) -> CorrelatorEstimate:
    """g(s_1,...,s_n) = <exp(i sum_k s_k alpha_k)>."""
    if len(signs) != protocol.n:
        raise ConfigurationError("sign pattern length must match protocol")
    if batches is None:
        batches = alpha_ensemble(protocol, source, n_traj, rng, dt=dt,
                                 threads=threads)
    sv = np.array(list(signs), dtype=float)
    means = []
    sizes = []
    for alphas in batches:
        vals = np.exp(1j * (alphas @ sv))
        means.append(complex(vals.mean()))
        sizes.append(alphas.shape[0])
    return _estimate_from_batches(means, sizes, 1, "analytic_per_trajectory")


def combine_to_g(correlators: dict[str, complex],
                 signs: SignPattern) -> complex:
    """Rebuild g(s_1,...,s_n) from the 2^n axis-string correlators.

    Expanding e^{i s_k alpha_k} = cos(alpha_k) + i s_k sin(alpha_k) gives
    g = sum over subsets Y of measurement slots of
    i^{|Y|} (prod_{k in Y} s_k) C_{axes(Y)}, with axis y on the slots in Y.
    For the alternating pattern this is the 2^n-term DD reconstruction
    (4 terms for the echo, 8 for CP-2).
    """
    n = len(signs)
    sv = list(signs)
    total = 0.0 + 0.0j
    for pattern in itertools.product("xy", repeat=n):
        axes = "".join(pattern)
        if axes not in correlators:
            raise KeyError(f"missing correlator for axis string {axes!r}")
        y_slots = [k for k, a in enumerate(axes) if a == "y"]
        coeff = (1j) ** len(y_slots)
        for k in y_slots:
            coeff *= sv[k]
        total += coeff * correlators[axes]
    return total


def all_axis_correlators(protocol: MeasurementProtocol, source: NoiseSource,
                         n_traj: int, rng: RngStream,
                         mode: str = "analytic_per_trajectory",
                         dt: float | None = None, threads: int = 1,
                         batches: list[np.ndarray] | None = None,
                         ) -> dict[str, CorrelatorEstimate]:
    """All 2^n axis-string correlators on one shared trajectory ensemble."""
    if batches is None:
        batches = alpha_ensemble(protocol, source, n_traj, rng, dt=dt,
                                 threads=threads)
    out = {}
    for pattern in itertools.product("xy", repeat=protocol.n):
        axes = "".join(pattern)
        out[axes] = correlator_axes(protocol, source, n_traj, rng, mode=mode,
                                    axes=axes, batches=batches)
    return out


def source_for_spectrum(spectrum: SpectrumModel,
                        n_modes: int = 1000) -> NoiseSource:
    """Exact OU generator for a single Lorentzian, harmonic synthesis otherwise."""
    comps = spectrum.components
    if len(comps) == 1 and isinstance(comps[0], Lorentzian):
        return OUSource(sigma=math.sqrt(comps[0].sigma2), tau_c=comps[0].tau_c)
    return SpectrumSource(spectrum, n_modes=n_modes)


@dataclasses.dataclass(frozen=True)
class DecompositionReport:
    mc: CorrelatorEstimate
    analytic: float
    z_score: float
    passed: bool


def same_axis_decomposition_check(protocol: MeasurementProtocol,
                                  spectrum: SpectrumModel, n_traj: int,
                                  rng: RngStream, dt: float | None = None,
                                  threads: int = 1) -> DecompositionReport:
    """Check C_x...x = 2^{-n} sum over all sign patterns of analytic g."""
    n = protocol.n
    if n > 12:
        raise ConfigurationError("2^n sign-pattern sum is intractable for n > 12")
    source = source_for_spectrum(spectrum)
    est = correlator_axes(protocol.with_axes("x" * n), source, n_traj, rng,
                          dt=dt, threads=threads)
    # g(-s) = conj(g(s)), so the s_1 = -1 half of the sum is the conjugate
    total = 0.0 + 0.0j
    for tail in itertools.product((1, -1), repeat=n - 1):
        g = g_gaussian(protocol, SignPattern((1,) + tail), spectrum)
        total += g + g.conjugate()
    analytic = (total / 2.0**n).real
    z = est.z_score(analytic)
    return DecompositionReport(mc=est, analytic=analytic, z_score=z,
                               passed=z < 3.0)


@dataclasses.dataclass(frozen=True)
class ProjectionCorrelators:
    c_plus: CorrelatorEstimate
    c_plus_plus: CorrelatorEstimate


def projection_correlators(t1: float, t2: float, source: NoiseSource,
                           n_traj: int, rng: RngStream,
                           dt: float | None = None,
                           threads: int = 1) -> ProjectionCorrelators:
    """Correlators of |+x> projections at t1 and t2 (negative-measurement setup).

    c_plus = <P_{+x}(t1)> and c_plus_plus = <P_{+x}(t1) P_{+x}(t2)>, both
    expressed through the same phase ensemble with segments (t1, t2 - t1).
    """
    if not 0 < t1 < t2:
        raise ConfigurationError("need 0 < t1 < t2")
    protocol = MeasurementProtocol((Segment(t1), Segment(t2 - t1)))
    batches = alpha_ensemble(protocol, source, n_traj, rng, dt=dt,
                             threads=threads)
    m_plus, m_pp, sizes = [], [], []
    for alphas in batches:
        c1 = np.cos(alphas[:, 0])
        c2 = np.cos(alphas[:, 1])
        m_plus.append(complex(np.mean(0.5 * (1.0 + c1))))
        m_pp.append(complex(np.mean(0.25 * (1.0 + c1) * (1.0 + c2))))
        sizes.append(alphas.shape[0])
    return ProjectionCorrelators(
        c_plus=_estimate_from_batches(m_plus, sizes, 1, "analytic_per_trajectory"),
        c_plus_plus=_estimate_from_batches(m_pp, sizes, 1, "analytic_per_trajectory"),
    )


def no_reprep_expectation(protocol: MeasurementProtocol, source: NoiseSource,
                          n_traj: int, rng: RngStream, dt: float | None = None,
                          threads: int = 1) -> CorrelatorEstimate:
    """<m_n> when the qubit is not re-prepared between measurements.

    The qubit holds its post-measurement sigma_x eigenstate through dead
    times; outcomes follow p_x(m | alpha_k, r) = (1 + m r cos alpha_k)/2
    with r the previous outcome.
    """
    if any(s.axis != "x" for s in protocol.segments):
        raise ConfigurationError("no-repreparation protocol requires all-x axes")
    batches = alpha_ensemble(protocol, source, n_traj, rng, dt=dt,
                             threads=threads)
    means, sizes = [], []
    for index, alphas in enumerate(batches):
        gen = rng.shifted((1 << 50) + index).generator()
        r = np.ones(alphas.shape[0])
        for k in range(alphas.shape[1]):
            p_plus = 0.5 * (1.0 + r * np.cos(alphas[:, k]))
            m = np.where(gen.random(alphas.shape[0]) < p_plus, 1.0, -1.0)
            r = m
        means.append(complex(r.mean()))
        sizes.append(alphas.shape[0])
    return _estimate_from_batches(means, sizes, 1, "sampled_outcomes")
