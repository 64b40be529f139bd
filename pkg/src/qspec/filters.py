"""Piecewise-constant time-domain filters and their exact Fourier transforms.

A measurement protocol (evolution times tau_k, dead times delta_k, sign
pattern s_k) induces a filter f(t) in {-1, 0, +1}; a dynamical-decoupling
pulse train induces one in {-1, +1}.  Frequency-domain quantities are
evaluated from closed forms on the breakpoint list, never from sampled
f(t), so there is no discretization bias in attenuation integrals.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np

from .noise import ConfigurationError


@dataclasses.dataclass(frozen=True)
class Segment:
    """One evolution-plus-measurement block: evolve tau, dead time delta."""

    tau: float
    delta: float = 0.0
    axis: str = "x"

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigurationError("segment tau must be positive")
        if self.delta < 0:
            raise ConfigurationError("segment delta must be >= 0")
        if self.axis not in ("x", "y"):
            raise ConfigurationError("segment axis must be 'x' or 'y'")


@dataclasses.dataclass(frozen=True)
class MeasurementProtocol:
    """Timing/axis description of an n-measurement run.

    The k-th initialization is at t_k - tau_k, the k-th measurement at t_k,
    and delta_k separates measurement k from initialization k+1.  Nothing
    follows the last measurement, so its delta is forced to zero.
    """

    segments: tuple[Segment, ...]
    omega: float = 0.0

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ConfigurationError("protocol needs at least one segment")
        if segs[-1].delta != 0.0:
            segs = segs[:-1] + (dataclasses.replace(segs[-1], delta=0.0),)
        object.__setattr__(self, "segments", segs)

    @property
    def n(self) -> int:
        return len(self.segments)

    @property
    def axes(self) -> str:
        return "".join(s.axis for s in self.segments)

    @property
    def measurement_times(self) -> np.ndarray:
        """t_k = sum_{j<=k} tau_j + sum_{j<k} delta_j, strictly increasing."""
        t = []
        acc = 0.0
        for seg in self.segments:
            acc += seg.tau
            t.append(acc)
            acc += seg.delta
        return np.array(t)

    @property
    def total_duration(self) -> float:
        return float(self.measurement_times[-1])

    @property
    def intervals(self) -> list[tuple[float, float]]:
        """Evolution windows (t_k - tau_k, t_k)."""
        times = self.measurement_times
        return [(t - seg.tau, t) for t, seg in zip(times, self.segments)]

    def with_axes(self, axes: str) -> "MeasurementProtocol":
        if len(axes) != self.n:
            raise ConfigurationError("axes string length must match protocol")
        segs = tuple(dataclasses.replace(s, axis=a)
                     for s, a in zip(self.segments, axes))
        return MeasurementProtocol(segs, self.omega)


def comb_protocol(tau: float, delta: float, n_blocks: int,
                  omega: float = 0.0) -> MeasurementProtocol:
    """2N equal segments: the periodic filter block of the spectroscopy comb."""
    if n_blocks < 1:
        raise ConfigurationError("n_blocks must be >= 1")
    segs = tuple(Segment(tau=tau, delta=delta) for _ in range(2 * n_blocks))
    return MeasurementProtocol(segs, omega)


@dataclasses.dataclass(frozen=True)
class SignPattern:
    signs: tuple[int, ...]

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if any(s not in (-1, 1) for s in signs):
            raise ConfigurationError("signs must be +1 or -1")
        if signs and signs[0] != 1:
            raise ConfigurationError("first sign is fixed to +1 by convention")
        object.__setattr__(self, "signs", signs)

    def __len__(self):
        return len(self.signs)

    def __iter__(self):
        return iter(self.signs)


def alternating_signs(n: int) -> SignPattern:
    return SignPattern(tuple(1 if k % 2 == 0 else -1 for k in range(n)))


@dataclasses.dataclass(frozen=True)
class PiecewiseFilter:
    """f(t) constant on [breakpoints[i], breakpoints[i+1]), values in {-1,0,1}."""

    breakpoints: tuple[float, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(int(v) for v in self.values)
        if len(bp) != len(vals) + 1:
            raise ConfigurationError("need len(breakpoints) == len(values)+1")
        if bp[0] != 0.0:
            raise ConfigurationError("filter must start at t=0")
        if any(bp[i + 1] <= bp[i] for i in range(len(bp) - 1)):
            raise ConfigurationError("breakpoints must be strictly ascending")
        if any(v not in (-1, 0, 1) for v in vals):
            raise ConfigurationError("filter values must be in {-1, 0, +1}")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def total_duration(self) -> float:
        return self.breakpoints[-1]

    def integral(self) -> float:
        """int f dt = sum_k s_k tau_k."""
        bp = np.asarray(self.breakpoints)
        return float(np.dot(self.values, np.diff(bp)))

    def square_integral(self) -> float:
        """int f^2 dt (total on-time)."""
        bp = np.asarray(self.breakpoints)
        return float(np.dot(np.square(self.values), np.diff(bp)))

    def sample(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.breakpoints, t, side="right") - 1,
                      0, len(self.values) - 1)
        vals = np.asarray(self.values)[idx]
        return np.where((t >= 0) & (t <= self.total_duration), vals, 0)


def build_filter(protocol: MeasurementProtocol,
                 signs: SignPattern) -> PiecewiseFilter:
    """Filter induced by the measurement protocol and a sign pattern.

    f = s_k on each evolution window, 0 on dead times.
    """
    if len(signs) != protocol.n:
        raise ConfigurationError(
            f"sign pattern length {len(signs)} != protocol length {protocol.n}"
        )
    bp = [0.0]
    vals: list[int] = []
    acc = 0.0
    for seg, s in zip(protocol.segments, signs):
        acc += seg.tau
        vals.append(s)
        bp.append(acc)
        if seg.delta > 0 and acc + seg.delta > acc:
            # dead times too short to advance the clock in float are dropped
            acc += seg.delta
            vals.append(0)
            bp.append(acc)
    return PiecewiseFilter(tuple(bp), tuple(vals))


def dd_filter(pulse_times, total_time: float) -> PiecewiseFilter:
    """Dynamical-decoupling filter: starts at +1, flips sign at each pulse."""
    pulses = [float(t) for t in pulse_times]
    if any(b <= a for a, b in zip(pulses, pulses[1:])):
        raise ConfigurationError("pulse times must be strictly increasing")
    if pulses and not (0.0 < pulses[0] and pulses[-1] < total_time):
        raise ConfigurationError("pulse times must lie strictly inside (0, total_time)")
    bp = [0.0] + pulses + [total_time]
    vals = [1 if k % 2 == 0 else -1 for k in range(len(bp) - 1)]
    return PiecewiseFilter(tuple(bp), tuple(vals))


def cpmg_pulse_times(interpulse: float, n_pulses: int) -> tuple[list[float], float]:
    """Carr-Purcell train: pulses at (k+1/2)*interpulse, half-spacing margins."""
    pulses = [(k + 0.5) * interpulse for k in range(n_pulses)]
    return (pulses, n_pulses * interpulse)


def filter_fourier(filt: PiecewiseFilter, omega) -> np.ndarray:
    """Exact closed-form Fourier transform f~(w) = int f(t) e^{iwt} dt."""
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    w = np.atleast_1d(omega).astype(float)
    bp = np.asarray(filt.breakpoints)
    vals = np.asarray(filt.values, dtype=float)
    a, b = bp[:-1], bp[1:]
    out = np.empty(len(w), dtype=complex)
    small = np.abs(w) * filt.total_duration < 1e-6
    ws = w[~small]
    if ws.size:
        res = np.empty(len(ws), dtype=complex)
        # chunk the (omega x breakpoint) outer products to bound memory
        chunk = max(1, int(4e6) // max(1, len(vals)))
        for start in range(0, len(ws), chunk):
            wc = ws[start:start + chunk]
            phase_b = np.exp(1j * np.outer(wc, b))
            phase_a = np.exp(1j * np.outer(wc, a))
            res[start:start + chunk] = ((phase_b - phase_a) @ vals) / (1j * wc)
        out[~small] = res
    if small.any():
        wl = w[small]
        # series of (e^{iwb}-e^{iwa})/(iw) through O(w^2)
        m0 = float(np.dot(vals, b - a))
        m1 = float(np.dot(vals, b**2 - a**2)) / 2.0
        m2 = float(np.dot(vals, b**3 - a**3)) / 6.0
        out[small] = m0 + 1j * wl * m1 - wl**2 * m2
    return out[0] if scalar else out


def filter_power(filt: PiecewiseFilter, omega) -> np.ndarray:
    """|f~(w)|^2."""
    ft = filter_fourier(filt, omega)
    return np.abs(ft) ** 2


def comb_coefficient(m: int, tau: float, delta: float) -> complex:
    """Fourier coefficient of the periodic comb block (period 2(tau+delta)).

    c_m = (2i/pi m) cos(pi m delta / (2 (tau+delta))) for odd m, else 0.
    """
    if tau <= 0 or delta < 0:
        raise ConfigurationError("need tau > 0 and delta >= 0")
    if m == 0 or m % 2 == 0:
        return 0.0 + 0.0j
    mm = abs(m)
    c = (2j / (math.pi * mm)) * math.cos(
        math.pi * mm * delta / (2.0 * (tau + delta))
    )
    return c if m > 0 else -c.conjugate()


def comb_parseval_sum(tau: float, delta: float, m_max: int = 100_001) -> float:
    """sum over odd m (both signs) of |c_m|^2; converges to tau/(tau+delta)."""
    m = np.arange(1, m_max + 1, 2, dtype=float)
    theta = math.pi * delta / (2.0 * (tau + delta))
    terms = (2.0 / (math.pi * m)) ** 2 * np.cos(m * theta) ** 2
    return 2.0 * float(terms.sum())


def default_m_max(tau: float, delta: float) -> int:
    # |c_m|^2 plateaus at (tau/delta)^2 out to m ~ delta/tau
    return max(51, 10 * math.ceil(delta / tau))


def comb_power_approx(omega, tau: float, delta: float, n_blocks: int,
                      m_max: int | None = None) -> np.ndarray:
    """Truncated comb approximation of |f~(w)|^2 for the N-block filter.

    |f~(w)|^2 ~ T sum_m |c_m|^2 T sinc^2((w - m w_p) T / 2), with
    T = N T_B, T_B = 2 (tau+delta), w_p = pi/(tau+delta); the sum runs
    over odd m of both signs up to |m| = m_max.
    """
    if n_blocks < 1:
        raise ConfigurationError("n_blocks must be >= 1")
    if m_max is None:
        m_max = default_m_max(tau, delta)
    if m_max < 1:
        raise ConfigurationError("m_max must be >= 1")
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    w = np.atleast_1d(omega).astype(float)
    t_block = 2.0 * (tau + delta)
    total = n_blocks * t_block
    w_p = math.pi / (tau + delta)
    ms = np.concatenate([np.arange(1, m_max + 1, 2),
                         -np.arange(1, m_max + 1, 2)])
    c2 = np.array([abs(comb_coefficient(int(m), tau, delta)) ** 2 for m in ms])
    # np.sinc(x) = sin(pi x)/(pi x)
    arg = (w[:, None] - ms[None, :] * w_p) * total / (2.0 * math.pi)
    vals = total * total * (np.sinc(arg) ** 2) @ c2
    return vals[0] if scalar else vals
