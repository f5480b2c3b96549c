"""Joint (u, f) Gaussian process: assembly, exact likelihood and prediction.

The training covariance is

    [[K_uu (+ K_extra), K_uf],
     [K_fu,             K_ff]] + S

where ``K_extra`` is the discrepancy or measurement-bias kernel acting on the
u channel only. Discrepancy terms are kept in u-predictions; bias terms are
learned but left out of them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, lapack, solve_triangular

from .errors import InputError
from .kernels import DerivOrder, HyperParams, KernelSpec, gram_orders, jitter_cholesky
from .physics import Block, BlockKernel, ConstantMean, block_gram, mean_f

LOG_2PI = math.log(2.0 * math.pi)
ZERO_NOISE_FLOOR = 1e-6


class VariantKind(str, enum.Enum):
    PLAIN = "plain"
    DISCREPANCY = "discrepancy"
    BIAS = "bias"


@dataclass(frozen=True)
class ModelVariant:
    kind: VariantKind = VariantKind.PLAIN
    extra_spec: KernelSpec | None = None
    extra_hp: HyperParams | None = None

    def __post_init__(self):
        kind = VariantKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is VariantKind.PLAIN:
            if self.extra_spec is not None:
                raise InputError("plain variant takes no extra kernel")
        elif self.extra_spec is None or self.extra_hp is None:
            raise InputError(f"{kind.value} variant needs an extra kernel and hyperparameters")
        else:
            self.extra_hp.check(self.extra_spec)

    @property
    def has_extra(self) -> bool:
        return self.kind is not VariantKind.PLAIN


def _points(X, dim):
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        return X.reshape(0, dim)
    if X.ndim == 1:
        X = X.reshape(-1, dim)
    return X


@dataclass
class ObservationSet:
    """Observed u values at ``X_u`` and forcing values at ``X_f``.

    ``noise_group_u`` / ``noise_group_f`` label each observation with a noise
    group; the reserved label ``"zero"`` marks noise-free observations.
    Treat instances as read-only: derived quantities are cached.
    """

    X_u: np.ndarray
    y_u: np.ndarray
    X_f: np.ndarray
    y_f: np.ndarray
    noise_group_u: np.ndarray | None = None
    noise_group_f: np.ndarray | None = None
    input_dim: int = 1

    def __post_init__(self):
        d = self.input_dim
        self.X_u = _points(self.X_u, d)
        self.X_f = _points(self.X_f, d)
        self.y_u = np.asarray(self.y_u, dtype=np.float64).ravel()
        self.y_f = np.asarray(self.y_f, dtype=np.float64).ravel()
        if self.X_u.shape[0] != self.y_u.size or self.X_f.shape[0] != self.y_f.size:
            raise InputError("inputs and outputs must have matching lengths")
        if self.X_u.shape[1] != d or self.X_f.shape[1] != d:
            raise InputError(f"inputs must have {d} column(s)")
        if self.n_u + self.n_f < 1:
            raise InputError("need at least one observation")
        self.noise_group_u = _groups(self.noise_group_u, self.n_u)
        self.noise_group_f = _groups(self.noise_group_f, self.n_f)

    @property
    def n_u(self) -> int:
        return self.y_u.size

    @property
    def n_f(self) -> int:
        return self.y_f.size

    def _cached(self, key, fn):
        cache = self.__dict__.setdefault("_cache", {})
        if key not in cache:
            cache[key] = fn()
        return cache[key]

    @property
    def y(self) -> np.ndarray:
        return self._cached("y", lambda: np.concatenate([self.y_u, self.y_f]))

    def noise_floor(self, channel: str) -> float:
        """Smallest allowed noise sd: ``1e-6`` times the channel's spread."""
        y = self.y_u if channel == "u" else self.y_f
        return self._cached(("floor", channel), lambda: ZERO_NOISE_FLOOR * channel_scale(y))

    def group_masks(self, channel: str) -> dict:
        """``{group: boolean mask}`` for one channel (cached)."""
        g = self.noise_group_u if channel == "u" else self.noise_group_f
        return self._cached(("masks", channel), lambda: {k: g == k for k in sorted(set(g.tolist()))})

    def replicate_summary(self):
        """Collapse exact replicates (same input and noise group) per channel.

        Returns ``None`` when there are no replicates, else a dict with the
        reduced :class:`ObservationSet` of group means and, per channel,
        ``first`` (index of one member), ``count`` and ``ss`` (within-group
        sum of squares).
        """
        return self._cached("replicates", self._replicate_summary)

    def _replicate_summary(self):
        out = {}
        for ch, X, y, g in (("u", self.X_u, self.y_u, self.noise_group_u),
                            ("f", self.X_f, self.y_f, self.noise_group_f)):
            keys = {}
            inv = np.empty(y.size, dtype=np.int64)
            for i in range(y.size):
                inv[i] = keys.setdefault((X[i].tobytes(), g[i]), len(keys))
            k = len(keys)
            count = np.bincount(inv, minlength=k)
            first = np.full(k, -1)
            for i in range(y.size - 1, -1, -1):
                first[inv[i]] = i
            ybar = np.bincount(inv, weights=y, minlength=k) / np.maximum(count, 1)
            ss = np.bincount(inv, weights=(y - ybar[inv]) ** 2, minlength=k)
            out[ch] = {"first": first, "count": count.astype(float), "ss": ss, "ybar": ybar}
        if out["u"]["first"].size == self.n_u and out["f"]["first"].size == self.n_f:
            return None
        ru, rf = out["u"], out["f"]
        out["obs"] = ObservationSet(
            self.X_u[ru["first"]], ru["ybar"], self.X_f[rf["first"]], rf["ybar"],
            self.noise_group_u[ru["first"]], self.noise_group_f[rf["first"]], self.input_dim,
        )
        return out

    def groups(self, channel: str) -> list[str]:
        g = self.noise_group_u if channel == "u" else self.noise_group_f
        return sorted(set(g.tolist()) - {"zero"})


def _groups(g, n):
    if g is None:
        return np.array(["0"] * n, dtype=object)
    g = np.asarray([str(v) for v in np.asarray(g).ravel()], dtype=object)
    if g.size != n:
        raise InputError("noise group labels must match the number of observations")
    return g


@dataclass(frozen=True)
class NoiseParams:
    """Noise standard deviations per channel, either one value or per group."""

    sigma_u: float | dict = 0.0
    sigma_f: float | dict = 0.0

    def for_group(self, channel: str, group: str) -> float:
        s = self.sigma_u if channel == "u" else self.sigma_f
        if group == "zero":
            return 0.0
        if isinstance(s, dict):
            return float(s[group])
        return float(s)


def channel_scale(y: np.ndarray) -> float:
    s = float(np.std(y)) if y.size > 1 else 0.0
    return s if s > 0 else 1.0


def noise_sd(noise: NoiseParams, obs: ObservationSet, channel: str) -> np.ndarray:
    """Per-observation noise sd, floored at ``1e-6 * channel scale``."""
    n = obs.n_u if channel == "u" else obs.n_f
    floor = obs.noise_floor(channel)
    masks = obs.group_masks(channel)
    if len(masks) == 1:
        (g,) = masks
        sd = np.full(n, noise.for_group(channel, g))
    else:
        sd = np.empty(n, dtype=np.float64)
        for g, mask in masks.items():
            sd[mask] = noise.for_group(channel, g)
    if np.any(sd < 0):
        raise InputError("noise standard deviations must be nonnegative")
    return np.maximum(sd, floor)


@dataclass
class JointGaussian:
    mean: np.ndarray
    cov: np.ndarray
    n_u: int = field(default=0)


def _mean_u_callable(mu):
    if mu is None:
        return ConstantMean(0.0)
    if isinstance(mu, (int, float)):
        return ConstantMean(float(mu))
    return mu


def latent_covariance(bk: BlockKernel, variant: ModelVariant, X_u, X_f, grad=False):
    """Noise-free training covariance ``K`` plus per-block gradient pieces.

    Gradient pieces map a parameter name to a list of ``(block, matrix)``
    where block is ``"uu"``, ``"uf"`` or ``"ff"``; the ``"uf"`` matrix stands
    for both off-diagonal blocks. Extra-kernel names get an ``extra.`` prefix.
    """
    n_u, n_f = X_u.shape[0], X_f.shape[0]
    N = n_u + n_f
    K = np.empty((N, N))
    pieces: dict[str, list] = {}

    def add(name, blk, M):
        pieces.setdefault(name, []).append((blk, M))

    if n_u:
        Kuu, g = block_gram(bk, Block.UU, X_u, X_u, grad=grad)
        if variant.has_extra:
            (Kx,), (gx,) = gram_orders(
                variant.extra_spec, variant.extra_hp, [_zero(bk)], X_u, X_u, grad=grad
            )
            Kuu = Kuu + Kx
            for k, v in gx.items():
                add("extra." + k, "uu", v)
        K[:n_u, :n_u] = Kuu
        for k, v in g.items():
            add(k, "uu", v)
    if n_u and n_f:
        Kuf, g = block_gram(bk, Block.UF, X_u, X_f, grad=grad)
        K[:n_u, n_u:] = Kuf
        K[n_u:, :n_u] = Kuf.T
        for k, v in g.items():
            add(k, "uf", v)
    if n_f:
        Kff, g = block_gram(bk, Block.FF, X_f, X_f, grad=grad)
        K[n_u:, n_u:] = Kff
        for k, v in g.items():
            add(k, "ff", v)
    return K, pieces


def _zero(bk):
    return DerivOrder.zero(bk.spec.input_dim)


def assemble_joint(bk, variant, noise, obs, mu=None) -> JointGaussian:
    """Mean and covariance of the stacked observations ``[y_u; y_f]``."""
    mu_u = _mean_u_callable(mu)
    mu_f = mean_f(mu_u, bk.op, bk.phi)
    K, _ = latent_covariance(bk, variant, obs.X_u, obs.X_f)
    s = np.concatenate([noise_sd(noise, obs, "u"), noise_sd(noise, obs, "f")])
    K[np.diag_indices_from(K)] += s**2
    mean = np.concatenate([mu_u(obs.X_u), mu_f(obs.X_f)])
    return JointGaussian(mean=mean, cov=K, n_u=obs.n_u)


def log_marginal(joint: JointGaussian, y) -> float:
    """Multivariate normal log density via a (jittered) Cholesky factor."""
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size != joint.mean.size:
        raise InputError(f"observation length {y.size} != model dimension {joint.mean.size}")
    L, _ = jitter_cholesky(joint.cov)
    r = y - joint.mean
    a = solve_triangular(L, r, lower=True, check_finite=False)
    return float(-0.5 * a @ a - np.sum(np.log(np.diag(L))) - 0.5 * y.size * LOG_2PI)


def gaussian_loglik_grad(K, resid, n_u, pieces, diag_pieces, mean_pieces):
    """Log density of ``resid ~ N(0, K)`` and its gradient.

    ``pieces`` are the covariance-block derivatives from
    :func:`latent_covariance`, ``diag_pieces`` map a name to
    ``(channel, vector)`` derivatives of the diagonal, and ``mean_pieces``
    map a name to the derivative of the mean vector.
    """
    L, _ = jitter_cholesky(K)
    alpha = cho_solve((L, True), resid, check_finite=False)
    Kinv, info = lapack.dpotri(L, lower=1)
    if info != 0:
        from .errors import NumericalError

        raise NumericalError("dpotri failed")
    # dpotrf(clean=1) zeroed the strict upper triangle, so mirror the lower
    Kinv = Kinv + Kinv.T
    Kinv.flat[:: Kinv.shape[0] + 1] *= 0.5
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    ll = -0.5 * resid @ alpha - 0.5 * logdet - 0.5 * resid.size * LOG_2PI
    W = np.outer(alpha, alpha)
    W -= Kinv
    Wd = np.diag(W).copy()
    blocks = {
        "uu": (np.ascontiguousarray(W[:n_u, :n_u]), 0.5),
        "uf": (np.ascontiguousarray(W[:n_u, n_u:]), 1.0),
        "ff": (np.ascontiguousarray(W[n_u:, n_u:]), 0.5),
    }
    grads: dict[str, float] = {}
    for name, plist in pieces.items():
        acc = 0.0
        for blk, M in plist:
            Wb, w = blocks[blk]
            acc += w * float(np.vdot(Wb, M))
        grads[name] = grads.get(name, 0.0) + acc
    for name, (ch, v) in diag_pieces.items():
        d = Wd[:n_u] if ch == "u" else Wd[n_u:]
        grads[name] = grads.get(name, 0.0) + 0.5 * float(d @ v)
    for name, dm in mean_pieces.items():
        grads[name] = grads.get(name, 0.0) + float(alpha @ dm)
    return float(ll), grads


def _cross(bk, variant, Xs, X_u, X_f, target: str):
    """Test-by-train cross covariance ``V*^T`` and the prior covariance at Xs."""
    parts = []
    if target == "u":
        include_extra = variant.kind is VariantKind.DISCREPANCY
        if X_u.shape[0]:
            Kx = block_gram(bk, Block.UU, Xs, X_u)[0]
            if include_extra:
                Kx = Kx + gram_orders(variant.extra_spec, variant.extra_hp, [_zero(bk)], Xs, X_u)[0][0]
            parts.append(Kx)
        if X_f.shape[0]:
            parts.append(block_gram(bk, Block.UF, Xs, X_f)[0])
        prior = block_gram(bk, Block.UU, Xs, Xs)[0]
        if include_extra:
            prior = prior + gram_orders(variant.extra_spec, variant.extra_hp, [_zero(bk)], Xs, Xs)[0][0]
    else:
        if X_u.shape[0]:
            parts.append(block_gram(bk, Block.FU, Xs, X_u)[0])
        if X_f.shape[0]:
            parts.append(block_gram(bk, Block.FF, Xs, X_f)[0])
        prior = block_gram(bk, Block.FF, Xs, Xs)[0]
    return np.hstack(parts), prior


def _predict(bk, variant, noise, obs, Xstar, mu, target):
    mu_u = _mean_u_callable(mu)
    joint = assemble_joint(bk, variant, noise, obs, mu_u)
    Xs = _points(Xstar, bk.spec.input_dim)
    Vt, prior = _cross(bk, variant, Xs, obs.X_u, obs.X_f, target)
    L, _ = jitter_cholesky(joint.cov)
    alpha = cho_solve((L, True), obs.y - joint.mean, check_finite=False)
    A = solve_triangular(L, Vt.T, lower=True, check_finite=False)
    prior_mean = mu_u(Xs) if target == "u" else mean_f(mu_u, bk.op, bk.phi)(Xs)
    mean = prior_mean + Vt @ alpha
    cov = prior - A.T @ A
    return mean, 0.5 * (cov + cov.T)


def predict_u(bk, variant, noise, obs, Xstar, mu=None):
    """Posterior mean and covariance of the latent u at ``Xstar``.

    Discrepancy variants predict u + delta; bias variants predict u alone.
    Observation noise is not added to the returned covariance.
    """
    return _predict(bk, variant, noise, obs, Xstar, mu, "u")


def predict_f(bk, variant, noise, obs, Xstar, mu=None):
    """Posterior mean and covariance of the latent forcing f at ``Xstar``."""
    return _predict(bk, variant, noise, obs, Xstar, mu, "f")
