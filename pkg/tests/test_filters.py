import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qspec import (MeasurementProtocol, PiecewiseFilter, Segment, SignPattern,
                   alternating_signs, build_filter, comb_coefficient,
                   comb_power_approx, comb_protocol, dd_filter, filter_fourier,
                   filter_power)
from qspec.filters import comb_parseval_sum, cpmg_pulse_times
from qspec.noise import ConfigurationError


def segments_strategy():
    seg = st.builds(
        Segment,
        tau=st.floats(0.05, 3.0),
        delta=st.floats(0.0, 2.0),
        axis=st.sampled_from(["x", "y"]),
    )
    return st.lists(seg, min_size=1, max_size=6).map(tuple)


def signs_for(n):
    tail = st.lists(st.sampled_from([1, -1]), min_size=n - 1, max_size=n - 1)
    return tail.map(lambda t: SignPattern((1, *t)))


class TestProtocol:
    def test_measurement_times(self):
        p = MeasurementProtocol((Segment(1.0, 0.5), Segment(2.0, 0.25),
                                 Segment(0.5)))
        np.testing.assert_allclose(p.measurement_times, [1.0, 3.5, 4.25])
        assert p.total_duration == pytest.approx(4.25)
        assert p.intervals == [(0.0, 1.0), (1.5, 3.5), (3.75, 4.25)]

    def test_trailing_dead_time_dropped(self):
        p = MeasurementProtocol((Segment(1.0, 0.5),))
        assert p.segments[-1].delta == 0.0

    def test_axes_string(self):
        p = MeasurementProtocol((Segment(1.0, axis="x"),
                                 Segment(1.0, axis="y")))
        assert p.axes == "xy"
        assert p.with_axes("yy").axes == "yy"

    def test_first_sign_fixed(self):
        with pytest.raises(ConfigurationError):
            SignPattern((-1, 1))


class TestBuildFilter:
    def test_echo_filter_shape(self):
        p = MeasurementProtocol((Segment(1.0), Segment(1.0)))
        f = build_filter(p, SignPattern((1, -1)))
        np.testing.assert_allclose(f.breakpoints, [0.0, 1.0, 2.0])
        np.testing.assert_allclose(f.values, [1.0, -1.0])
        assert f.integral() == pytest.approx(0.0)
        assert f.square_integral() == pytest.approx(2.0)

    def test_dead_time_becomes_zero_value(self):
        p = MeasurementProtocol((Segment(1.0, 0.5), Segment(1.0)))
        f = build_filter(p, SignPattern((1, 1)))
        np.testing.assert_allclose(f.breakpoints, [0.0, 1.0, 1.5, 2.5])
        np.testing.assert_allclose(f.values, [1.0, 0.0, 1.0])

    def test_dd_filter_matches_comb_protocol_without_dead_time(self):
        # a DD comb with interpulse tau equals the measurement comb at delta=0
        tau, n_blocks = 0.3, 4
        protocol = comb_protocol(tau, 0.0, n_blocks)
        via_protocol = build_filter(protocol, alternating_signs(2 * n_blocks))
        pulses = [k * tau for k in range(1, 2 * n_blocks)]
        via_dd = dd_filter(pulses, 2 * n_blocks * tau)
        w = np.linspace(0.0, 40.0, 301)
        np.testing.assert_allclose(filter_power(via_dd, w),
                                   filter_power(via_protocol, w), atol=1e-12)

    def test_sample(self):
        f = PiecewiseFilter((0.0, 1.0, 2.0), (1.0, -1.0))
        np.testing.assert_allclose(f.sample([0.5, 1.5]), [1.0, -1.0])


class TestFourier:
    def test_single_window_analytic(self):
        # |f~(w)|^2 = 4 sin^2(w tau / 2) / w^2 for one +1 window
        f = PiecewiseFilter((0.0, 1.0), (1.0,))
        w = np.array([0.5, 1.0, 3.0])
        expect = 4.0 * np.sin(w / 2.0) ** 2 / w**2
        np.testing.assert_allclose(filter_power(f, w), expect, rtol=1e-12)

    @given(segments_strategy().flatmap(
        lambda segs: st.tuples(st.just(segs), signs_for(len(segs)))))
    @settings(max_examples=60, deadline=None)
    def test_zero_frequency_limit_is_filter_integral(self, case):
        segs, signs = case
        f = build_filter(MeasurementProtocol(segs), signs)
        val = complex(filter_fourier(f, 0.0))
        assert val == pytest.approx(f.integral(), abs=1e-9)
        # the series branch must agree with the raw closed form at the cut
        w = 0.9e-6 / f.total_duration
        bp = np.asarray(f.breakpoints)
        vals = np.asarray(f.values, dtype=float)
        raw = np.dot(vals, np.exp(1j * w * bp[1:]) - np.exp(1j * w * bp[:-1]))
        raw /= 1j * w
        assert complex(filter_fourier(f, w)) == pytest.approx(
            complex(raw), abs=1e-7 * f.total_duration)

    @given(segments_strategy().flatmap(
        lambda segs: st.tuples(st.just(segs), signs_for(len(segs)))),
        st.floats(0.01, 50.0))
    @settings(max_examples=60, deadline=None)
    def test_negative_frequency_symmetry(self, case, w):
        segs, signs = case
        f = build_filter(MeasurementProtocol(segs), signs)
        plus = complex(filter_fourier(f, w))
        minus = complex(filter_fourier(f, -w))
        assert minus == pytest.approx(plus.conjugate(), rel=1e-10, abs=1e-12)

    @given(segments_strategy().flatmap(
        lambda segs: st.tuples(st.just(segs), signs_for(len(segs)))))
    @settings(max_examples=40, deadline=None)
    def test_riemann_sum_agrees_with_closed_form(self, case):
        segs, signs = case
        f = build_filter(MeasurementProtocol(segs), signs)
        w = 1.7 / f.total_duration
        # trapezoid piece by piece so the jumps never enter the rule
        bp = np.asarray(f.breakpoints)
        brute = 0.0 + 0.0j
        for a, b, v in zip(bp[:-1], bp[1:], f.values):
            if v:
                t = np.linspace(a, b, 2001)
                brute += v * np.trapezoid(np.exp(1j * w * t), t)
        assert complex(filter_fourier(f, w)) == pytest.approx(brute, abs=1e-6)


class TestCombCoefficients:
    def test_c1_squared_at_zero_dead_time(self):
        assert abs(comb_coefficient(1, 1.0, 0.0)) ** 2 == pytest.approx(
            4.0 / math.pi**2)

    def test_even_harmonics_vanish(self):
        assert comb_coefficient(2, 1.0, 0.5) == 0.0
        assert comb_coefficient(0, 1.0, 0.5) == 0.0

    @pytest.mark.parametrize("tau,delta", [(1.0, 0.0), (1.0, 0.5),
                                           (0.2, 1.3)])
    def test_parseval_sum(self, tau, delta):
        assert comb_parseval_sum(tau, delta) == pytest.approx(
            tau / (tau + delta), abs=1e-4)

    def test_coefficients_shrink_with_dead_time(self):
        full = abs(comb_coefficient(1, 1.0, 0.0))
        damped = abs(comb_coefficient(1, 1.0, 1.0))
        assert damped < full

    def test_comb_power_approx_matches_exact_at_peaks(self):
        # delta/(tau+delta) chosen so no odd harmonic is comb-suppressed
        tau, delta, n_blocks = 0.5, 0.1, 16
        w_p = math.pi / (tau + delta)
        filt = build_filter(comb_protocol(tau, delta, n_blocks),
                            alternating_signs(2 * n_blocks))
        for m in (1, 3, 5):
            exact = float(filter_power(filt, m * w_p))
            approx = float(comb_power_approx(m * w_p, tau, delta, n_blocks))
            assert exact > 1e-6  # the peak must actually be present
            assert approx == pytest.approx(exact, rel=0.1)

    def test_peak_value_is_total_time_squared_times_c2(self):
        tau, delta, n_blocks = 0.5, 0.25, 32
        w_p = math.pi / (tau + delta)
        total = 2 * n_blocks * (tau + delta)
        filt = build_filter(comb_protocol(tau, delta, n_blocks),
                            alternating_signs(2 * n_blocks))
        exact = float(filter_power(filt, w_p))
        c2 = abs(comb_coefficient(1, tau, delta)) ** 2
        assert exact == pytest.approx(total**2 * c2, rel=0.01)
