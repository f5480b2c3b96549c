"""Prior distributions and the matching unconstraining transforms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InputError

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _log_sigmoid(z):
    return -np.logaddexp(0.0, -z)


def _sigmoid(z):
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


_EXP_MAX = 700.0


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float
    support = "interval"

    def __post_init__(self):
        if not self.low < self.high:
            raise InputError(f"Uniform needs low < high, got ({self.low}, {self.high})")

    def logpdf(self, x):
        return -math.log(self.high - self.low)

    def dlogpdf(self, x):
        return 0.0

    def sample(self, rng, size=None):
        return rng.uniform(self.low, self.high, size)

    def ppf(self, q):
        return self.low + (self.high - self.low) * np.asarray(q)

    # scaled logit: x = low + (high - low) * sigmoid(z)
    def to_constrained(self, z):
        return self.low + (self.high - self.low) * _sigmoid(z)

    def to_unconstrained(self, x):
        u = (x - self.low) / (self.high - self.low)
        return math.log(u) - math.log1p(-u)

    def dx_dz(self, z):
        s = _sigmoid(z)
        return (self.high - self.low) * s * (1.0 - s)

    def log_jacobian(self, z):
        return math.log(self.high - self.low) + float(_log_sigmoid(z) + _log_sigmoid(-z))

    def dlog_jacobian(self, z):
        return 1.0 - 2.0 * _sigmoid(z)


@dataclass(frozen=True)
class HalfNormal:
    """Half-normal on (0, inf); ``scale`` is the standard deviation."""

    scale: float
    support = "positive"

    def __post_init__(self):
        if not self.scale > 0:
            raise InputError(f"HalfNormal scale must be positive, got {self.scale}")

    def logpdf(self, x):
        return math.log(2.0) - _LOG_SQRT_2PI - math.log(self.scale) - 0.5 * (x / self.scale) ** 2

    def dlogpdf(self, x):
        return -x / self.scale**2

    def sample(self, rng, size=None):
        return np.abs(rng.normal(0.0, self.scale, size))

    def ppf(self, q):
        from scipy.stats import halfnorm

        return halfnorm.ppf(q, scale=self.scale)

    def to_constrained(self, z):
        return math.exp(min(z, _EXP_MAX))

    def to_unconstrained(self, x):
        return math.log(x)

    def dx_dz(self, z):
        return math.exp(min(z, _EXP_MAX))

    def log_jacobian(self, z):
        return z

    def dlog_jacobian(self, z):
        return 1.0


@dataclass(frozen=True)
class Normal:
    """Unbounded normal prior, for location parameters such as a constant mean."""

    loc: float
    scale: float
    support = "real"

    def __post_init__(self):
        if not self.scale > 0:
            raise InputError(f"Normal scale must be positive, got {self.scale}")

    def logpdf(self, x):
        return -_LOG_SQRT_2PI - math.log(self.scale) - 0.5 * ((x - self.loc) / self.scale) ** 2

    def dlogpdf(self, x):
        return -(x - self.loc) / self.scale**2

    def sample(self, rng, size=None):
        return rng.normal(self.loc, self.scale, size)

    def ppf(self, q):
        from scipy.stats import norm

        return norm.ppf(q, loc=self.loc, scale=self.scale)

    def to_constrained(self, z):
        return z

    def to_unconstrained(self, x):
        return x

    def dx_dz(self, z):
        return 1.0

    def log_jacobian(self, z):
        return 0.0

    def dlog_jacobian(self, z):
        return 0.0


def prior_from_dict(d) -> "Uniform | HalfNormal | Normal":
    """Build a prior from ``{"dist": "uniform", "low": .., "high": ..}`` and friends."""
    kind = d["dist"].lower().replace("-", "").replace("_", "")
    if kind == "uniform":
        return Uniform(float(d["low"]), float(d["high"]))
    if kind == "halfnormal":
        return HalfNormal(float(d["scale"]))
    if kind == "normal":
        return Normal(float(d["loc"]), float(d["scale"]))
    raise InputError(f"unknown prior {d['dist']!r}")


def prior_to_dict(p) -> dict:
    if isinstance(p, Uniform):
        return {"dist": "uniform", "low": p.low, "high": p.high}
    if isinstance(p, HalfNormal):
        return {"dist": "halfnormal", "scale": p.scale}
    return {"dist": "normal", "loc": p.loc, "scale": p.scale}
