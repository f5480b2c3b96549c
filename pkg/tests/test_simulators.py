"""Windkessel integration, heat fields, noise, bias and cycle folding."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pigp.errors import InputError, NumericalError
from pigp.gp import ObservationSet
from pigp.simulators import (
    BiasField,
    ConstantInflow,
    HeatField,
    InflowWaveform,
    add_bias,
    add_noise,
    sample_heat,
    simulate_wk2,
    simulate_wk3,
    synchronize_cycles,
)

INFLOW = InflowWaveform()
CYCLE = np.linspace(0.0, 1.0, 1000, endpoint=False)


class TestInflow:
    def test_shape(self):
        assert INFLOW(0.0) == 0.0
        assert INFLOW(1 / 6) == pytest.approx(430.0)
        assert INFLOW(0.5) == 0.0
        assert INFLOW(1 / 6 + 3.0) == pytest.approx(430.0)

    def test_mean_over_cycle(self):
        # the half-sine averages to 2 q_max t_sys / (pi period)
        t = np.linspace(0, 1, 200_001)
        assert np.trapezoid(INFLOW(t), t) == pytest.approx(2 * 430 / (3 * np.pi), rel=1e-8)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.0, 10.0))
    def test_derivative_matches_finite_differences(self, t):
        s = t % 1.0
        if min(abs(s), abs(s - 1 / 3), abs(s - 1.0)) < 1e-4:
            return
        h = 1e-6
        fd = (INFLOW(t + h) - INFLOW(t - h)) / (2 * h)
        assert float(INFLOW.derivative(t)) == pytest.approx(float(fd), rel=1e-5, abs=1e-3)

    def test_breakpoints(self):
        assert INFLOW.breakpoints(0.0, 2.0) == pytest.approx([1 / 3, 1.0, 4 / 3])
        assert INFLOW.breakpoints(0.5, 0.9) == []

    def test_invalid(self):
        with pytest.raises(InputError):
            InflowWaveform(t_sys=1.0, period=1.0)
        with pytest.raises(InputError):
            InflowWaveform(t_sys=0.0)


class TestWK2:
    def test_constant_inflow_closed_form(self):
        R, C, q0, p0 = 1.0, 1.1, 100.0, 80.0
        tau = R * C
        t = np.linspace(0.0, 10 * tau, 57)
        p = simulate_wk2(ConstantInflow(q0), R, C, t, p0=p0, n_warm_cycles=0)
        exact = R * q0 + (p0 - R * q0) * np.exp(-t / tau)
        assert np.max(np.abs(p - exact)) < 1e-9
        # after ten time constants the transient is down to exp(-10) of its start
        assert abs(p[-1] - R * q0) < abs(p0 - R * q0) * np.exp(-10) * (1 + 1e-6)
        assert abs(p[-1] - exact[-1]) < 1e-6

    def test_mean_ratio_is_R(self):
        for R, C in [(1.0, 1.1), (0.7, 2.0), (2.5, 0.6)]:
            p = simulate_wk2(INFLOW, R, C, CYCLE + 20.0)
            assert p.mean() / INFLOW(CYCLE).mean() == pytest.approx(R, rel=0.01)

    def test_step_refinement(self):
        t = np.linspace(0.0, 2.0, 41)
        a = simulate_wk2(INFLOW, 1.0, 1.1, t, max_step=1e-3)
        b = simulate_wk2(INFLOW, 1.0, 1.1, t, max_step=5e-4)
        assert np.max(np.abs(a - b)) < 1e-8

    def test_fourth_order_convergence(self):
        t = np.linspace(0.0, 2.0, 11)
        ref = simulate_wk2(INFLOW, 1.0, 1.1, t, max_step=1e-4)
        errs = [np.max(np.abs(simulate_wk2(INFLOW, 1.0, 1.1, t, max_step=h) - ref)) for h in (0.02, 0.01, 0.005)]
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(rates > 3.7), rates

    def test_periodic_steady_state(self):
        p = simulate_wk2(INFLOW, 1.0, 1.1, np.r_[CYCLE, CYCLE + 1.0])
        assert np.max(np.abs(p[:1000] - p[1000:])) < 1e-3

    def test_invalid(self):
        with pytest.raises(InputError):
            simulate_wk2(INFLOW, 0.0, 1.0, CYCLE)
        with pytest.raises(InputError):
            simulate_wk2(INFLOW, 1.0, 1.0, CYCLE[::-1])
        with pytest.raises(NumericalError):
            simulate_wk2(INFLOW, 1e-6, 1e-6, CYCLE[:10])


class TestWK3:
    def test_reduces_to_wk2(self):
        t = np.linspace(0, 3, 45, endpoint=False)
        a = simulate_wk3(INFLOW, 0.0, 1.0, 1.1, t)
        b = simulate_wk2(INFLOW, 1.0, 1.1, t)
        assert np.max(np.abs(a - b)) < 1e-8

    def test_mean_ratio_is_total_resistance(self):
        for R1, R2 in [(0.05, 1.0), (0.1, 0.8), (0.2, 1.5)]:
            p = simulate_wk3(INFLOW, R1, R2, 1.1, CYCLE + 20.0)
            assert p.mean() / INFLOW(CYCLE).mean() == pytest.approx(R1 + R2, rel=0.01)

    @staticmethod
    def amplitudes(total=None):
        out = []
        for R1 in np.linspace(0.01, 0.2, 12):
            R2 = 1.0 if total is None else total - R1
            out.append(np.ptp(simulate_wk3(INFLOW, R1, R2, 1.1, CYCLE + 20.0)))
        return np.array(out)

    @pytest.mark.parametrize("total", [None, 1.0])
    def test_amplitude_is_monotone_in_R1(self, total):
        # R1 adds R1 * Q to the pressure, so the pulse grows with R1
        assert np.all(np.diff(self.amplitudes(total)) > 0)

    @pytest.mark.xfail(strict=True, reason="the WK3 equation makes the amplitude grow with R1")
    def test_amplitude_decreases_with_R1(self):
        assert np.all(np.diff(self.amplitudes(1.0)) < 0)

    def test_fourth_order_convergence(self):
        t = np.linspace(0.0, 2.0, 11)
        ref = simulate_wk3(INFLOW, 0.05, 1.0, 1.1, t, max_step=1e-4)
        errs = [np.max(np.abs(simulate_wk3(INFLOW, 0.05, 1.0, 1.1, t, max_step=h) - ref))
                for h in (0.02, 0.01, 0.005)]
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(rates > 3.7), rates

    def test_invalid(self):
        with pytest.raises(InputError):
            simulate_wk3(INFLOW, -0.1, 1.0, 1.0, CYCLE)


class TestHeat:
    def test_examples(self):
        assert HeatField.u(0.0, 0.25) == pytest.approx(1.0)
        assert HeatField.f(0.0, 0.25) == pytest.approx(4 * np.pi**2 - 1)
        assert 4 * np.pi**2 - 1 == pytest.approx(38.478, abs=1e-3)

    def test_residual_vanishes(self, rng):
        t, x = rng.uniform(0, 1, (2, 1000))
        assert np.max(np.abs(HeatField().residual(t, x))) < 1e-10

    def test_residual_by_finite_differences(self, rng):
        t, x = rng.uniform(0.05, 0.95, (2, 200))
        h = 1e-4
        u_t = (HeatField.u(t + h, x) - HeatField.u(t - h, x)) / (2 * h)
        u_xx = (HeatField.u(t, x + h) - 2 * HeatField.u(t, x) + HeatField.u(t, x - h)) / h**2
        assert np.max(np.abs(u_t - u_xx - HeatField.f(t, x))) < 1e-4

    def test_sample_heat(self):
        a = sample_heat(35, 20, 3)
        b = sample_heat(35, 20, 3)
        assert np.array_equal(a.X_u, b.X_u) and np.array_equal(a.y_f, b.y_f)
        assert a.n_u == 35 and a.n_f == 20 and a.input_dim == 2
        assert np.all((a.X_u >= 0) & (a.X_u <= 1))
        np.testing.assert_array_equal(a.y_u, HeatField.u(a.X_u[:, 0], a.X_u[:, 1]))
        assert not np.array_equal(a.X_u, sample_heat(35, 20, 4).X_u)
        with pytest.raises(InputError):
            sample_heat(0, 5, 0)


class TestBias:
    def test_examples(self):
        b = BiasField()
        assert b(0.0, 0.5) == pytest.approx(0.0, abs=1e-15)
        assert b(0.5, 0.125) == pytest.approx(1 / 3 + 0.125)

    def test_bound(self, rng):
        t, x = rng.uniform(0, 1, (2, 10_000))
        assert np.max(np.abs(BiasField()(t, x))) <= 1 / 3 + 1 / 8

    def test_add_bias(self):
        obs = sample_heat(10, 6, 0)
        out = add_bias(obs)
        assert out.y_f.tobytes() == obs.y_f.tobytes()
        np.testing.assert_allclose(out.y_u - obs.y_u, BiasField()(obs.X_u[:, 0], obs.X_u[:, 1]), atol=1e-15)
        X = np.array([[0.0, 0.5]])
        one = ObservationSet(X, np.array([2.0]), X, np.array([1.0]), input_dim=2)
        assert add_bias(one).y_u[0] == pytest.approx(2.0, abs=1e-15)


class TestNoise:
    def test_zero_sigma_is_identity(self):
        v = np.arange(5.0)
        assert np.array_equal(add_noise(v, 0.0, 1), v)

    def test_sample_sd(self):
        e = add_noise(np.zeros(100_000), 4.0, 0)
        assert e.std() == pytest.approx(4.0, rel=0.01)
        assert abs(e.mean()) < 0.05

    def test_seeded(self):
        v = np.zeros(10)
        assert np.array_equal(add_noise(v, 1.0, 5), add_noise(v, 1.0, 5))
        assert not np.array_equal(add_noise(v, 1.0, 5), add_noise(v, 1.0, 6))
        with pytest.raises(InputError):
            add_noise(v, -1.0, 0)


class TestSynchronize:
    def test_single_cycle_unchanged(self):
        t = np.linspace(0, 1, 15, endpoint=False)
        y = np.sin(t)
        ft, fy = synchronize_cycles(t, y, 1.0)
        np.testing.assert_allclose(ft, t, atol=1e-12)
        assert np.array_equal(fy, y)

    def test_three_identical_cycles(self):
        t = np.arange(45) * (3.0 / 45)
        y = simulate_wk2(INFLOW, 1.0, 1.1, t)
        ft, fy = synchronize_cycles(t, y, 1.0)
        assert ft.size == 45
        uniq, counts = np.unique(ft, return_counts=True)
        assert uniq.size == 15 and np.all(counts == 3)
        for u in uniq:
            vals = fy[ft == u]
            assert np.ptp(vals) < 5e-3  # transient left after the warm-up cycles

    def test_invalid(self):
        with pytest.raises(InputError):
            synchronize_cycles(np.arange(3.0), np.arange(2.0), 1.0)
