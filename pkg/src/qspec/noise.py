"""Stationary classical noise: spectrum models and trajectory generators.

All trajectories are sampled on a uniform grid starting at t=0.  Gaussian
noise with an arbitrary model spectrum is synthesized by harmonic
superposition with Rayleigh-distributed amplitudes, which gives exactly
Gaussian marginals at any mode count and supports delta-like spectral
peaks without periodicity artifacts.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

_MASK64 = (1 << 64) - 1


class ConfigurationError(ValueError):
    """Raised for physically inconsistent noise/protocol parameters."""


@dataclasses.dataclass(frozen=True)
class RngStream:
    """Counter-based RNG stream (Philox).

    Distinct ``stream_index`` values give statistically independent
    streams; identical (seed, stream_index) reproduce identical draws
    regardless of thread scheduling.
    """

    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        key = ((self.stream_index & _MASK64) << 64) | (self.seed & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))

    def shifted(self, offset: int) -> "RngStream":
        return RngStream(self.seed, self.stream_index + offset)


# ---------------------------------------------------------------------------
# Spectrum model components.  All spectra are two-sided and even, S(-w)=S(w);
# the total variance is sigma^2 = int_0^inf S(w) dw / pi.
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class White:
    """Flat spectrum S(w) = level.

    ``cutoff`` band-limits the component to [0, cutoff].  With
    cutoff=None the component is treated as ideal white noise: attenuation
    integrals use the exact Parseval value, but trajectory synthesis is
    impossible (infinite variance) and is rejected.
    """

    level: float
    cutoff: float | None = None

    def __post_init__(self):
        if self.level < 0:
            raise ConfigurationError("White.level must be >= 0")
        if self.cutoff is not None and self.cutoff <= 0:
            raise ConfigurationError("White.cutoff must be positive")

    def psd(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.cutoff is None:
            return np.full_like(omega, self.level)
        return np.where(np.abs(omega) <= self.cutoff, self.level, 0.0)

    @property
    def variance(self) -> float:
        if self.cutoff is None:
            return math.inf
        return self.level * self.cutoff / math.pi

    @property
    def band(self) -> tuple[float, float]:
        if self.cutoff is None:
            raise ConfigurationError(
                "ideal White (cutoff=None) cannot be synthesized; set a cutoff"
            )
        return (0.0, self.cutoff)


@dataclasses.dataclass(frozen=True)
class Lorentzian:
    """Ornstein-Uhlenbeck spectrum S(w) = 2 sigma2 tau_c / (1 + w^2 tau_c^2)."""

    sigma2: float
    tau_c: float

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ConfigurationError("Lorentzian.sigma2 must be >= 0")
        if self.tau_c <= 0:
            raise ConfigurationError("Lorentzian.tau_c must be positive")

    def psd(self, omega):
        omega = np.asarray(omega, dtype=float)
        return 2.0 * self.sigma2 * self.tau_c / (1.0 + (omega * self.tau_c) ** 2)

    @property
    def variance(self) -> float:
        return self.sigma2

    @property
    def band(self) -> tuple[float, float]:
        # 200/tau_c keeps the neglected variance below ~0.4%.
        return (0.0, 200.0 / self.tau_c)


@dataclasses.dataclass(frozen=True)
class NarrowPeak:
    """Sharp spectral feature, S(w) ~ weight * delta(|w| - center).

    ``weight`` is the integrated spectral weight on the positive axis, so
    the variance contribution is weight/pi.  ``width`` sets the lineshape
    (Lorentzian of FWHM ``width``) when the peak has to be resolved.
    """

    weight: float
    center: float
    width: float

    def __post_init__(self):
        if self.weight < 0:
            raise ConfigurationError("NarrowPeak.weight must be >= 0")
        if self.center <= 0:
            raise ConfigurationError("NarrowPeak.center must be positive")
        if self.width <= 0:
            raise ConfigurationError("NarrowPeak.width must be positive")

    def psd(self, omega):
        omega = np.asarray(omega, dtype=float)
        hw = 0.5 * self.width
        return self.weight * (hw / math.pi) / ((np.abs(omega) - self.center) ** 2 + hw**2)

    @property
    def variance(self) -> float:
        return self.weight / math.pi

    @property
    def band(self) -> tuple[float, float]:
        return (max(0.0, self.center - 0.5 * self.width),
                self.center + 0.5 * self.width)


@dataclasses.dataclass(frozen=True)
class PowerLaw:
    """S(w) = amplitude / |w|^exponent on [low_cut, high_cut], zero outside."""

    amplitude: float
    exponent: float
    low_cut: float
    high_cut: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ConfigurationError("PowerLaw.amplitude must be >= 0")
        if not (0 < self.low_cut < self.high_cut):
            raise ConfigurationError("PowerLaw requires 0 < low_cut < high_cut")

    def psd(self, omega):
        omega = np.asarray(omega, dtype=float)
        a = np.abs(omega)
        inside = (a >= self.low_cut) & (a <= self.high_cut)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = self.amplitude / np.where(a > 0, a, 1.0) ** self.exponent
        return np.where(inside, val, 0.0)

    @property
    def variance(self) -> float:
        e = self.exponent
        if abs(e - 1.0) < 1e-12:
            integral = self.amplitude * math.log(self.high_cut / self.low_cut)
        else:
            integral = self.amplitude * (
                self.high_cut ** (1 - e) - self.low_cut ** (1 - e)
            ) / (1 - e)
        return integral / math.pi

    @property
    def band(self) -> tuple[float, float]:
        return (self.low_cut, self.high_cut)


Component = White | Lorentzian | NarrowPeak | PowerLaw


@dataclasses.dataclass(frozen=True)
class SpectrumModel:
    """Composable two-sided power spectral density."""

    components: tuple[Component, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def psd(self, omega):
        omega = np.asarray(omega, dtype=float)
        total = np.zeros_like(omega)
        for comp in self.components:
            total = total + comp.psd(omega)
        return total

    @property
    def variance(self) -> float:
        return sum(c.variance for c in self.components)

    @property
    def omega_max(self) -> float:
        """Highest non-negligible frequency across components."""
        if not self.components:
            return 0.0
        return max(c.band[1] for c in self.components)

    def __add__(self, other: "SpectrumModel") -> "SpectrumModel":
        return SpectrumModel(self.components + other.components)


@dataclasses.dataclass(frozen=True)
class NoiseTrajectory:
    """One realization of xi(t) on a uniform grid starting at t0 = 0."""

    dt: float
    samples: np.ndarray
    t0: float = 0.0
    warnings: tuple[str, ...] = ()

    @property
    def duration(self) -> float:
        return self.dt * (len(self.samples) - 1)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.samples))


def _n_samples(duration: float, dt: float) -> int:
    # grid must cover [0, duration]
    return int(math.ceil(duration / dt - 1e-9)) + 1


# ---------------------------------------------------------------------------
# Ornstein-Uhlenbeck
# ---------------------------------------------------------------------------

def ou_ensemble(sigma: float, tau_c: float, duration: float, dt: float,
                n_traj: int, rng: RngStream) -> np.ndarray:
    """Exact discrete OU recursion; returns array of shape (n_traj, n)."""
    if sigma < 0:
        raise ConfigurationError("sigma must be >= 0")
    if tau_c <= 0:
        raise ConfigurationError("tau_c must be positive")
    n = _n_samples(duration, dt)
    if sigma == 0.0:
        return np.zeros((n_traj, n))
    if dt > tau_c / 20:
        raise ConfigurationError(
            f"dt={dt} undersamples the OU correlation time; need dt <= tau_c/20"
        )
    gen = rng.generator()
    decay = math.exp(-dt / tau_c)
    innov = sigma * math.sqrt(1.0 - decay * decay)
    out = np.empty((n_traj, n))
    out[:, 0] = sigma * gen.standard_normal(n_traj)
    for i in range(1, n):
        out[:, i] = out[:, i - 1] * decay + innov * gen.standard_normal(n_traj)
    return out


def ou_trajectory(sigma: float, tau_c: float, duration: float, dt: float,
                  rng: RngStream) -> NoiseTrajectory:
    if sigma <= 0:
        raise ConfigurationError("sigma must be positive; use zero_trajectory for sigma=0")
    samples = ou_ensemble(sigma, tau_c, duration, dt, 1, rng)[0]
    return NoiseTrajectory(dt=dt, samples=samples)


def zero_trajectory(duration: float, dt: float) -> NoiseTrajectory:
    return NoiseTrajectory(dt=dt, samples=np.zeros(_n_samples(duration, dt)))


# ---------------------------------------------------------------------------
# Harmonic-superposition synthesis for arbitrary model spectra
# ---------------------------------------------------------------------------

def _component_modes(comp: Component, duration: float,
                     n_modes: int) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Mode frequencies and per-mode powers (variance contributions)."""
    warnings: list[str] = []
    if isinstance(comp, NarrowPeak):
        if comp.width * duration < 0.1:
            # unresolved by any filter of this duration: one dedicated tone
            return (np.array([comp.center]), np.array([comp.variance]), warnings)
        k = 101
        lo, hi = comp.band
        edges = np.linspace(lo, hi, k + 1)
        centers = 0.5 * (edges[:-1] + edges[1:])
        weights = comp.psd(centers) * np.diff(edges) / math.pi
        # renormalize truncated lineshape to the exact component variance
        weights *= comp.variance / weights.sum()
        return (centers, weights, warnings)
    lo, hi = comp.band
    if hi <= lo:
        return (np.array([]), np.array([]), warnings)
    grid_step = (hi - lo) / n_modes
    if isinstance(comp, Lorentzian) and 1.0 / comp.tau_c < grid_step:
        warnings.append(
            f"Lorentzian width 1/tau_c={1.0 / comp.tau_c:g} unresolved by "
            f"mode grid step {grid_step:g}"
        )
    edges = np.linspace(lo, hi, n_modes + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    powers = comp.psd(centers) * grid_step / math.pi
    return (centers, powers, warnings)


def gaussian_ensemble(spectrum: SpectrumModel, duration: float, dt: float,
                      n_modes: int, n_traj: int, rng: RngStream,
                      ) -> tuple[np.ndarray, tuple[str, ...]]:
    """Ensemble of Gaussian trajectories with the given spectrum.

    Returns (samples[n_traj, n], warnings).  Each trajectory is a sum of
    cosine modes with Rayleigh amplitudes, <a_j^2>/2 = S(w_j) dw_j / pi.
    """
    if n_modes < 1:
        raise ConfigurationError("n_modes must be >= 1")
    n = _n_samples(duration, dt)
    if not spectrum.components:
        return (np.zeros((n_traj, n)), ())
    if not math.isfinite(spectrum.variance):
        raise ConfigurationError(
            "spectrum has infinite total variance; band-limit the White component"
        )
    omega_max = spectrum.omega_max
    if omega_max > 0 and dt > math.pi / (5.0 * omega_max):
        raise ConfigurationError(
            f"dt={dt} does not resolve the spectrum: need dt <= pi/(5*omega_max)"
            f" = {math.pi / (5 * omega_max):g}"
        )
    freqs: list[np.ndarray] = []
    powers: list[np.ndarray] = []
    warnings: list[str] = []
    for comp in spectrum.components:
        w, p, warn = _component_modes(comp, duration, n_modes)
        freqs.append(w)
        powers.append(p)
        warnings.extend(warn)
    omega = np.concatenate(freqs)
    power = np.concatenate(powers)
    keep = power > 0
    omega, power = omega[keep], power[keep]
    t = dt * np.arange(n)
    cos_wt = np.cos(np.outer(omega, t))
    sin_wt = np.sin(np.outer(omega, t))
    gen = rng.generator()
    out = np.empty((n_traj, n))
    # batch the matrix products to bound memory
    batch = max(1, int(2e7) // max(1, len(omega)))
    for start in range(0, n_traj, batch):
        stop = min(start + batch, n_traj)
        m = stop - start
        amp = gen.rayleigh(scale=np.sqrt(power), size=(m, len(omega)))
        phase = gen.uniform(0.0, 2.0 * math.pi, size=(m, len(omega)))
        out[start:stop] = (amp * np.cos(phase)) @ cos_wt - (amp * np.sin(phase)) @ sin_wt
    return (out, tuple(warnings))


def gaussian_trajectory(spectrum: SpectrumModel, duration: float, dt: float,
                        n_modes: int, rng: RngStream) -> NoiseTrajectory:
    samples, warnings = gaussian_ensemble(spectrum, duration, dt, n_modes, 1, rng)
    return NoiseTrajectory(dt=dt, samples=samples[0], warnings=warnings)


def quadratic_transform(traj: NoiseTrajectory, v2: float,
                        subtract_mean: bool = True,
                        mean_square: float | None = None) -> NoiseTrajectory:
    """xi'(t) = v2 * (xi(t)^2 - m), with m the stationary <xi^2> if subtracted.

    The subtracted mean is absorbed into the observable qubit splitting, so
    it must be the stationary ensemble value: callers pass the generating
    sigma^2 as ``mean_square``.
    """
    if subtract_mean:
        if mean_square is None:
            raise ConfigurationError(
                "subtract_mean requires the stationary mean_square of the input"
            )
        m = mean_square
    else:
        m = 0.0
    return NoiseTrajectory(dt=traj.dt, samples=v2 * (traj.samples**2 - m),
                           t0=traj.t0, warnings=traj.warnings)


# ---------------------------------------------------------------------------
# Ensemble-level noise sources used by the Monte Carlo layer
# ---------------------------------------------------------------------------

class NoiseSource:
    """Generates trajectory ensembles; pure function of (params, stream)."""

    variance: float

    def ensemble(self, duration: float, dt: float, n_traj: int,
                 rng: RngStream) -> np.ndarray:
        raise NotImplementedError

    def recommended_dt(self, tau_min: float) -> float:
        raise NotImplementedError


@dataclasses.dataclass(frozen=True)
class ZeroSource(NoiseSource):
    variance: float = 0.0

    def ensemble(self, duration, dt, n_traj, rng):
        return np.zeros((n_traj, _n_samples(duration, dt)))

    def recommended_dt(self, tau_min):
        return tau_min / 20.0


@dataclasses.dataclass(frozen=True)
class OUSource(NoiseSource):
    sigma: float
    tau_c: float

    @property
    def variance(self):
        return self.sigma**2

    def ensemble(self, duration, dt, n_traj, rng):
        return ou_ensemble(self.sigma, self.tau_c, duration, dt, n_traj, rng)

    def recommended_dt(self, tau_min):
        return min(self.tau_c / 50.0, tau_min / 20.0)


@dataclasses.dataclass(frozen=True)
class SpectrumSource(NoiseSource):
    spectrum: SpectrumModel
    n_modes: int = 1000

    @property
    def variance(self):
        return self.spectrum.variance

    def ensemble(self, duration, dt, n_traj, rng):
        samples, _ = gaussian_ensemble(self.spectrum, duration, dt,
                                       self.n_modes, n_traj, rng)
        return samples

    def recommended_dt(self, tau_min):
        dt = tau_min / 20.0
        wmax = self.spectrum.omega_max
        if wmax > 0:
            dt = min(dt, 2.0 * math.pi / (20.0 * wmax))
        for comp in self.spectrum.components:
            if isinstance(comp, Lorentzian):
                dt = min(dt, comp.tau_c / 50.0)
        return dt


@dataclasses.dataclass(frozen=True)
class QuadraticSource(NoiseSource):
    """v2 * xi^2(t) of a Gaussian base source, optionally mean-subtracted."""

    base: NoiseSource
    v2: float
    subtract_mean: bool = True

    @property
    def variance(self):
        # Gaussian base: var(v2 xi^2) = 2 v2^2 sigma^4
        return 2.0 * self.v2**2 * self.base.variance**2

    def ensemble(self, duration, dt, n_traj, rng):
        x = self.base.ensemble(duration, dt, n_traj, rng)
        m = self.base.variance if self.subtract_mean else 0.0
        return self.v2 * (x * x - m)

    def recommended_dt(self, tau_min):
        return self.base.recommended_dt(tau_min)


@dataclasses.dataclass(frozen=True)
class CompositeSource(NoiseSource):
    """Sum of independent sources (drawn from disjoint substreams)."""

    sources: tuple[NoiseSource, ...]

    @property
    def variance(self):
        return sum(s.variance for s in self.sources)

    def ensemble(self, duration, dt, n_traj, rng):
        total = None
        for i, src in enumerate(self.sources):
            x = src.ensemble(duration, dt, n_traj, rng.shifted((i + 1) << 40))
            total = x if total is None else total + x
        if total is None:
            total = np.zeros((n_traj, _n_samples(duration, dt)))
        return total

    def recommended_dt(self, tau_min):
        return min(s.recommended_dt(tau_min) for s in self.sources)
