"""Synthetic data: Windkessel pressure, heat-equation fields, noise and bias.

The Windkessel ODEs are integrated with classic fourth-order Runge-Kutta.
Integration intervals are split at the kinks of the inflow waveform so the
fourth-order rate is kept across cycles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .gp import ObservationSet


@dataclass(frozen=True)
class InflowWaveform:
    """Half-sine systolic inflow, zero during diastole.

    ``Q(t) = q_max * sin(pi * s / t_sys)`` for ``s = t mod period`` in
    ``[0, t_sys]`` and 0 otherwise.
    """

    q_max: float = 430.0
    t_sys: float = 1.0 / 3.0
    period: float = 1.0

    def __post_init__(self):
        if not (0 < self.t_sys < self.period):
            raise InputError("need 0 < t_sys < period")

    def _phase(self, t):
        return np.mod(np.asarray(t, dtype=float), self.period)

    def __call__(self, t):
        s = self._phase(t)
        return np.where(s <= self.t_sys, self.q_max * np.sin(np.pi * s / self.t_sys), 0.0)

    def derivative(self, t):
        s = self._phase(t)
        w = np.pi / self.t_sys
        return np.where(s <= self.t_sys, self.q_max * w * np.cos(w * s), 0.0)

    def on_piece(self, t, ref):
        """Value and derivative at ``t`` continued from the smooth piece holding ``ref``.

        At a kink the two one-sided limits differ; integrating a segment
        between kinks needs the limits from inside the segment.
        """
        k = math.floor(ref / self.period)
        s = t - k * self.period
        if ref - k * self.period <= self.t_sys:
            w = np.pi / self.t_sys
            return self.q_max * math.sin(w * s), self.q_max * w * math.cos(w * s)
        return 0.0, 0.0

    def breakpoints(self, t0, t1):
        """Kinks of the waveform strictly inside ``(t0, t1)``."""
        k0 = math.floor(t0 / self.period) - 1
        k1 = math.ceil(t1 / self.period) + 1
        pts = []
        for k in range(k0, k1 + 1):
            for b in (k * self.period, k * self.period + self.t_sys):
                if t0 < b < t1:
                    pts.append(b)
        return sorted(pts)


@dataclass(frozen=True)
class ConstantInflow:
    q0: float
    period: float = 1.0

    def __call__(self, t):
        return np.full(np.shape(t), float(self.q0))

    def derivative(self, t):
        return np.zeros(np.shape(t))

    def on_piece(self, t, ref):
        return float(self.q0), 0.0

    def breakpoints(self, t0, t1):
        return []


def _rk4_segment(rhs, t0, t1, y, max_step):
    n = max(1, math.ceil((t1 - t0) / max_step - 1e-12))
    h = (t1 - t0) / n
    ref = 0.5 * (t0 + t1)  # the forcing is smooth on the piece holding the midpoint
    t = t0
    for _ in range(n):
        k1 = rhs(t, y, ref)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1, ref)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2, ref)
        k4 = rhs(t + h, y + h * k3, ref)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def integrate(rhs, inflow, t_grid, p0, t_start, max_step=1e-3):
    """Integrate a scalar ODE from ``t_start`` and report it on ``t_grid``.

    Steps never exceed ``max_step`` and never straddle an inflow breakpoint.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(np.diff(t_grid) <= 0):
        raise InputError("t_grid must be a non-empty strictly increasing 1D array")
    if t_start > t_grid[0]:
        raise InputError("integration must start at or before the first grid time")
    if not max_step > 0:
        raise InputError("max_step must be positive")
    out = np.empty(t_grid.size)
    y = float(p0)
    t = float(t_start)
    for i, tg in enumerate(t_grid):
        knots = [t, *inflow.breakpoints(t, tg), tg] if tg > t else [t]
        for a, b in zip(knots[:-1], knots[1:]):
            y = _rk4_segment(rhs, a, b, y, max_step)
        if not np.isfinite(y):
            raise NumericalError(f"integration produced a non-finite state at t={tg}")
        out[i] = y
        t = tg
    return out


def _wk2_rhs(inflow, R, C):
    def rhs(t, p, ref):
        return (inflow.on_piece(t, ref)[0] - p / R) / C

    return rhs


def _wk3_rhs(inflow, R1, R2, C):
    def rhs(t, p, ref):
        q, dq = inflow.on_piece(t, ref)
        return -p / (R2 * C) + q * (1.0 + R1 / R2) / C + R1 * dq

    return rhs


def _start_time(inflow, t_grid, n_warm_cycles):
    return float(np.asarray(t_grid, dtype=float)[0]) - n_warm_cycles * inflow.period


def simulate_wk2(inflow, R, C, t_grid, p0=80.0, n_warm_cycles=10, max_step=1e-3):
    """Two-element Windkessel pressure ``dP/dt = (Q - P/R) / C`` on ``t_grid``.

    Integration starts ``n_warm_cycles`` periods before ``t_grid[0]`` at
    pressure ``p0`` so the transient has decayed by the first grid time.
    """
    if not (R > 0 and C > 0):
        raise InputError("R and C must be positive")
    t0 = _start_time(inflow, t_grid, n_warm_cycles)
    return integrate(_wk2_rhs(inflow, R, C), inflow, t_grid, p0, t0, max_step)


def simulate_wk3(inflow, R1, R2, C, t_grid, p0=80.0, n_warm_cycles=10, max_step=1e-3):
    """Three-element Windkessel pressure.

    ``dP/dt = -P/(R2 C) + Q (1 + R1/R2) / C + R1 dQ/dt``; ``R1 = 0``
    recovers the two-element model with ``R = R2``.
    """
    if not (R1 >= 0 and R2 > 0 and C > 0):
        raise InputError("need R1 >= 0 and R2, C > 0")
    t0 = _start_time(inflow, t_grid, n_warm_cycles)
    return integrate(_wk3_rhs(inflow, R1, R2, C), inflow, t_grid, p0, t0, max_step)


@dataclass(frozen=True)
class HeatField:
    """``u = exp(-t) sin(2 pi x)`` with the matching forcing for diffusivity 1."""

    alpha: float = 1.0

    @staticmethod
    def u(t, x):
        return np.exp(-np.asarray(t, float)) * np.sin(2 * np.pi * np.asarray(x, float))

    @staticmethod
    def f(t, x):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        return np.exp(-t) * (4 * np.pi**2 - 1) * np.sin(2 * np.pi * x)

    def residual(self, t, x):
        """``u_t - alpha u_xx - f`` from the analytic derivatives."""
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        u = self.u(t, x)
        return -u - self.alpha * (-(4 * np.pi**2) * u) - self.f(t, x)


@dataclass(frozen=True)
class BiasField:
    """Sensor bias ``b(t, x) = sin(4 pi x) / 3 + 2 t^2 (1 - t)^2``."""

    @staticmethod
    def __call__(t, x):
        t = np.asarray(t, float)
        x = np.asarray(x, float)
        return np.sin(4 * np.pi * x) / 3.0 + 2.0 * t**2 * (1.0 - t) ** 2


def sample_heat(n_u, n_f, seed) -> ObservationSet:
    """Noise-free heat observations at uniform random points of [0, 1]^2.

    Inputs are ordered (t, x).
    """
    if n_u < 1 or n_f < 1:
        raise InputError("need at least one point per channel")
    rng = np.random.default_rng(seed)
    Xu = rng.uniform(0.0, 1.0, (n_u, 2))
    Xf = rng.uniform(0.0, 1.0, (n_f, 2))
    return ObservationSet(
        Xu, HeatField.u(Xu[:, 0], Xu[:, 1]), Xf, HeatField.f(Xf[:, 0], Xf[:, 1]), input_dim=2
    )


def add_noise(values, sigma, seed):
    """``values + N(0, sigma^2)`` i.i.d., reproducible by ``seed``."""
    if sigma < 0:
        raise InputError("sigma must be nonnegative")
    values = np.asarray(values, dtype=float)
    if sigma == 0:
        return values.copy()
    rng = np.random.default_rng(seed)
    return values + rng.normal(0.0, sigma, values.shape)


def add_bias(obs: ObservationSet, bias=None) -> ObservationSet:
    """Add the sensor bias to ``y_u`` (inputs ordered (t, x)); ``y_f`` untouched."""
    bias = bias or BiasField()
    y_u = obs.y_u + bias(obs.X_u[:, 0], obs.X_u[:, 1])
    return ObservationSet(
        obs.X_u, y_u, obs.X_f, obs.y_f, obs.noise_group_u, obs.noise_group_f, obs.input_dim
    )


def synchronize_cycles(t, y, period):
    """Fold a periodic series onto one period, keeping replicates.

    Returns ``(t mod period, y)``; the order and count of points are kept.
    Folded times are rounded to 12 decimals so replicates coincide exactly.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape:
        raise InputError("t and y must have the same shape")
    if t.size and (t.max() - t.min()) > 0 and period <= 0:
        raise InputError("period must be positive")
    folded = np.round(np.mod(t, period), 12)
    # snap round-off just below a full period back to zero
    folded[np.isclose(folded, period, rtol=0, atol=1e-12 * max(1.0, period))] = 0.0
    return folded, y.copy()
