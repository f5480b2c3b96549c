"""FITC and VFE sparse approximations of the physics-informed GP.

Inducing variables ``w = [u(Z_u); f(Z_f)]`` summarize the latent
``g = [u(X_u); f(X_f)]``. With ``Q = K_gw K_ww^{-1} K_wg`` and noise
variances ``s``:

    FITC: y ~ N(mu, Q + diag(K_gg - Q) + diag(s))
    VFE:  log N(y | mu, Q + diag(s)) - 1/2 sum_i (K_ii - Q_ii) / s_i

Everything is computed from m x m factors in O(N m^2). Discrepancy and
bias kernels enter every uu block (K_gg, K_gw and K_ww).
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize

from .errors import InputError, NumericalError, OptimizationError
from .gp import (
    LOG_2PI,
    ObservationSet,
    VariantKind,
    _points,
    latent_covariance,
    noise_sd,
)
from .kernels import DerivOrder, Family, HyperParams, KernelSpec, gram_orders, jitter_cholesky
from .physics import Block, block_diag, block_gram, mean_f_scale


class SparseMethod(str, enum.Enum):
    FITC = "fitc"
    VFE = "vfe"


@dataclass(frozen=True)
class InducingSet:
    """Inducing inputs for the u and f channels."""

    Z_u: np.ndarray
    Z_f: np.ndarray

    def __post_init__(self):
        zu = np.asarray(self.Z_u, dtype=float)
        zf = np.asarray(self.Z_f, dtype=float)
        dim = next((z.shape[1] for z in (zu, zf) if z.ndim == 2 and z.size), 1)
        zu, zf = _points(zu, dim), _points(zf, dim)
        if zu.shape[0] + zf.shape[0] < 1:
            raise InputError("need at least one inducing point")
        if not (np.all(np.isfinite(zu)) and np.all(np.isfinite(zf))):
            raise InputError("inducing inputs must be finite")
        object.__setattr__(self, "Z_u", zu)
        object.__setattr__(self, "Z_f", zf)

    @property
    def m_u(self) -> int:
        return self.Z_u.shape[0]

    @property
    def m_f(self) -> int:
        return self.Z_f.shape[0]

    @property
    def m(self) -> int:
        return self.m_u + self.m_f

    @property
    def input_dim(self) -> int:
        return self.Z_u.shape[1]

    def flat(self) -> np.ndarray:
        return np.concatenate([self.Z_u.ravel(), self.Z_f.ravel()])

    def with_flat(self, v) -> "InducingSet":
        d = self.input_dim
        k = self.m_u * d
        return InducingSet(np.reshape(v[:k], (self.m_u, d)), np.reshape(v[k:], (self.m_f, d)))

    def check(self, obs: ObservationSet) -> None:
        if self.input_dim != obs.input_dim:
            raise InputError("inducing inputs and observations differ in input dimension")
        if self.m_u > obs.n_u or self.m_f > obs.n_f:
            warnings.warn(
                f"more inducing points ({self.m_u}, {self.m_f}) than observations "
                f"({obs.n_u}, {obs.n_f}) in a channel",
                stacklevel=3,
            )

    def as_dict(self) -> dict:
        return {"Z_u": self.Z_u.tolist(), "Z_f": self.Z_f.tolist()}

    @classmethod
    def from_dict(cls, d) -> "InducingSet":
        return cls(np.asarray(d["Z_u"], float), np.asarray(d["Z_f"], float))


def _extra_gram(variant, P, Q, grad):
    zero = DerivOrder.zero(variant.extra_spec.input_dim)
    (M,), (g,) = gram_orders(variant.extra_spec, variant.extra_hp, [zero], P, Q, grad=grad)
    return M, g


def cross_covariance(bk, variant, X_u, X_f, Z_u, Z_f, grad=False, include_extra=True):
    """Cross covariance ``K_gw`` between stacked inputs and inducing inputs.

    Returns ``(K, pieces)``; ``pieces[name]`` lists ``(rows, cols, dK)``
    and extra-kernel names carry an ``extra.`` prefix.
    """
    n_u, n_f, m_u, m_f = X_u.shape[0], X_f.shape[0], Z_u.shape[0], Z_f.shape[0]
    K = np.zeros((n_u + n_f, m_u + m_f))
    pieces: dict[str, list] = {}
    ru, rf = slice(0, n_u), slice(n_u, n_u + n_f)
    cu, cf = slice(0, m_u), slice(m_u, m_u + m_f)
    todo = [(Block.UU, X_u, Z_u, ru, cu), (Block.UF, X_u, Z_f, ru, cf),
            (Block.FU, X_f, Z_u, rf, cu), (Block.FF, X_f, Z_f, rf, cf)]
    for blk, A, B, rs, cs in todo:
        if A.shape[0] == 0 or B.shape[0] == 0:
            continue
        M, g = block_gram(bk, blk, A, B, grad=grad)
        if blk is Block.UU and include_extra and variant.has_extra:
            Mx, gx = _extra_gram(variant, A, B, grad)
            M = M + Mx
            for k, v in gx.items():
                pieces.setdefault("extra." + k, []).append((rs, cs, v))
        K[rs, cs] = M
        for k, v in g.items():
            pieces.setdefault(k, []).append((rs, cs, v))
    return K, pieces


def _diag_kgg(bk, variant, X_u, X_f, grad):
    """Diagonal of ``K_gg`` and its derivative vectors."""
    n_u, n_f = X_u.shape[0], X_f.shape[0]
    d = np.empty(n_u + n_f)
    pieces: dict[str, np.ndarray] = {}

    def add(name, sl, v):
        pieces.setdefault(name, np.zeros(n_u + n_f))[sl] += v

    if n_u:
        du, gu = block_diag(bk, Block.UU, X_u, grad=grad)
        if variant.has_extra:
            zero = np.zeros((1, variant.extra_spec.input_dim))
            Mx, gx = _extra_gram(variant, zero, zero, grad)
            du = du + Mx[0, 0]
            for k, v in gx.items():
                add("extra." + k, slice(0, n_u), v[0, 0])
        d[:n_u] = du
        for k, v in gu.items():
            add(k, slice(0, n_u), v)
    if n_f:
        df, gf = block_diag(bk, Block.FF, X_f, grad=grad)
        d[n_u:] = df
        for k, v in gf.items():
            add(k, slice(n_u, None), v)
    return d, pieces


@dataclass
class _Factors:
    Lw: np.ndarray
    A: np.ndarray  # Lw^{-1} K_wg
    lam: np.ndarray  # diagonal of Lambda
    LB: np.ndarray  # chol(I + A Lambda^{-1} A^T)
    qdiag: np.ndarray
    kdiag: np.ndarray
    s: np.ndarray
    resid: np.ndarray


def _factorize(method, Kww, Kgw, kdiag, s, resid) -> _Factors:
    # no fixed jitter: with Z = X the triangular solve then reproduces K exactly
    Lw, _ = jitter_cholesky(Kww)
    A = solve_triangular(Lw, Kgw.T, lower=True, check_finite=False)
    qdiag = np.einsum("ij,ij->j", A, A)
    if method is SparseMethod.FITC:
        lam = np.maximum(kdiag - qdiag, 0.0) + s
    else:
        lam = s.copy()
    if not (np.all(lam > 0) and np.all(np.isfinite(lam))):
        raise NumericalError("non-positive diagonal in the sparse approximation")
    B = (A / lam) @ A.T
    B[np.diag_indices_from(B)] += 1.0
    LB, _ = jitter_cholesky(B)
    return _Factors(Lw, A, lam, LB, qdiag, kdiag, s, resid)


def _logdens(method, F: _Factors):
    r, lam = F.resid, F.lam
    c = solve_triangular(F.LB, F.A @ (r / lam), lower=True, check_finite=False)
    quad = float(r @ (r / lam) - c @ c)
    logdet = float(np.sum(np.log(lam)) + 2.0 * np.sum(np.log(np.diag(F.LB))))
    ll = -0.5 * quad - 0.5 * logdet - 0.5 * r.size * LOG_2PI
    if method is SparseMethod.VFE:
        ll -= 0.5 * float(np.sum(np.maximum(F.kdiag - F.qdiag, 0.0) / F.s))
    return ll, c


def _noise_sd(noise, obs):
    return np.concatenate([noise_sd(noise, obs, "u"), noise_sd(noise, obs, "f")])


def _assemble(model, obs, Z, values, grad):
    bk, variant, noise, mu = model.build({**model.fixed, **values})
    Kww, pw = latent_covariance(bk, variant, Z.Z_u, Z.Z_f, grad=grad)
    Kgw, pgw = cross_covariance(bk, variant, obs.X_u, obs.X_f, Z.Z_u, Z.Z_f, grad=grad)
    kdiag, pd = _diag_kgg(bk, variant, obs.X_u, obs.X_f, grad)
    c, dc = mean_f_scale(model.operator, bk.phi)
    mean = np.concatenate([np.full(obs.n_u, mu), np.full(obs.n_f, c * mu)])
    return dict(noise=noise, mu=mu, Kww=Kww, pw=pw, Kgw=Kgw, pgw=pgw, kdiag=kdiag, pd=pd,
                sd=_noise_sd(noise, obs), c=c, dc=dc, resid=obs.y - mean, m_u=Z.m_u)


def sparse_log_marginal(method, model, obs, Z: InducingSet, values, grad: bool = False):
    """Approximate log marginal likelihood, optionally with its gradient.

    Parameters
    ----------
    method : SparseMethod or str
        ``"fitc"`` or ``"vfe"``.
    model : PIModel
    obs : ObservationSet
    Z : InducingSet
    values : mapping
        Parameter values; fixed ones may be omitted.
    grad : bool

    Returns
    -------
    float, or ``(float, dict)`` with the gradient by parameter name.
    """
    method = SparseMethod(method)
    a = _assemble(model, obs, Z, values, grad)
    F = _factorize(method, a["Kww"], a["Kgw"], a["kdiag"], a["sd"] ** 2, a["resid"])
    ll, c = _logdens(method, F)
    if not grad:
        return ll
    return ll, _gradient(method, model, obs, a, F, c)


def _gradient(method, model, obs, a, F: _Factors, c):
    from .inference.model import noise_diag_pieces

    lam = F.lam
    # Sigma^{-1} = Lam^{-1} - C^T C with C = LB^{-1} A Lam^{-1}
    Cm = solve_triangular(F.LB, F.A / lam, lower=True, check_finite=False)
    gamma = F.resid / lam - Cm.T @ c
    mdiag = gamma**2 - (1.0 / lam - np.einsum("ij,ij->j", Cm, Cm))
    P = solve_triangular(F.Lw, F.A, lower=True, trans="T", check_finite=False)
    # P M for M = gamma gamma^T - Sigma^{-1}, never forming an N x N matrix
    PM = np.outer(P @ gamma, gamma) - (P / lam - (P @ Cm.T) @ Cm)
    if method is SparseMethod.FITC:
        PMs = PM - P * mdiag
        c_kdiag = 0.5 * mdiag
        c_s = 0.5 * mdiag
    else:
        t = np.maximum(F.kdiag - F.qdiag, 0.0)
        PMs = PM + P / F.s
        c_kdiag = -0.5 / F.s
        c_s = 0.5 * mdiag + 0.5 * t / F.s**2
    W_gw = PMs.T
    W_ww = -0.5 * (PMs @ P.T)
    m_u = a["m_u"]
    ww = {"uu": (W_ww[:m_u, :m_u], 1.0), "uf": (W_ww[:m_u, m_u:], 2.0), "ff": (W_ww[m_u:, m_u:], 1.0)}
    free = set(model.free_names)
    grads: dict[str, float] = {}

    def add(name, v):
        full = model.piece_name(name)
        if full in free:
            grads[full] = grads.get(full, 0.0) + float(v)

    for name, plist in a["pw"].items():
        for blk, M in plist:
            Wb, w = ww[blk]
            add(name, w * np.vdot(Wb, M))
    for name, plist in a["pgw"].items():
        for rs, cs, M in plist:
            add(name, np.vdot(W_gw[rs, cs], M))
    for name, v in a["pd"].items():
        add(name, c_kdiag @ v)
    n_u = obs.n_u
    sd = a["sd"]
    for name, (ch, v) in noise_diag_pieces(model, obs, a["noise"], sd[:n_u], sd[n_u:], free).items():
        cs = c_s[:n_u] if ch == "u" else c_s[n_u:]
        grads[name] = grads.get(name, 0.0) + float(cs @ v)
    if "mu" in free:
        grads["mu"] = grads.get("mu", 0.0) + float(gamma[:n_u].sum() + a["c"] * gamma[n_u:].sum())
    for k, v in a["dc"].items():
        if k in free and a["mu"] != 0.0:
            grads[k] = grads.get(k, 0.0) + float(v * a["mu"] * gamma[n_u:].sum())
    return grads


@dataclass(frozen=True)
class SparseLikelihood:
    """Picklable likelihood callable for :class:`PosteriorTarget`."""

    method: SparseMethod
    Z: InducingSet

    def __call__(self, model, obs, values, grad=True):
        if grad:
            return sparse_log_marginal(self.method, model, obs, self.Z, values, grad=True)
        return sparse_log_marginal(self.method, model, obs, self.Z, values), {}


# -- prediction ---------------------------------------------------------------
def _star_cross(bk, variant, Xs, Z, target):
    """``K_*w`` and the prior covariance at ``Xs`` for target u or f."""
    parts = []
    if target == "u":
        include = variant.kind is VariantKind.DISCREPANCY
        if Z.m_u:
            K = block_gram(bk, Block.UU, Xs, Z.Z_u)[0]
            parts.append(K + _extra_gram(variant, Xs, Z.Z_u, False)[0] if include else K)
        if Z.m_f:
            parts.append(block_gram(bk, Block.UF, Xs, Z.Z_f)[0])
        prior = block_gram(bk, Block.UU, Xs, Xs)[0]
        if include:
            prior = prior + _extra_gram(variant, Xs, Xs, False)[0]
    else:
        if Z.m_u:
            parts.append(block_gram(bk, Block.FU, Xs, Z.Z_u)[0])
        if Z.m_f:
            parts.append(block_gram(bk, Block.FF, Xs, Z.Z_f)[0])
        prior = block_gram(bk, Block.FF, Xs, Xs)[0]
    return np.hstack(parts), prior


def sparse_predict(method, model, obs, Z: InducingSet, values, Xstar, target="u", noise_override=None):
    """Sparse posterior mean and covariance of u (or f) at ``Xstar``.

    ``noise_override`` maps noise parameter names to values used in place
    of those in ``values``. Bias variants predict the unbiased u and
    discrepancy variants predict u + delta.
    """
    method = SparseMethod(method)
    if target not in ("u", "f"):
        raise InputError("target must be 'u' or 'f'")
    vals = {**model.fixed, **values, **(noise_override or {})}
    bk, variant, noise, mu = model.build(vals)
    Xs = _points(Xstar, bk.spec.input_dim)
    Kww, _ = latent_covariance(bk, variant, Z.Z_u, Z.Z_f)
    Kgw, _ = cross_covariance(bk, variant, obs.X_u, obs.X_f, Z.Z_u, Z.Z_f)
    kdiag, _ = _diag_kgg(bk, variant, obs.X_u, obs.X_f, False)
    c, _ = mean_f_scale(model.operator, bk.phi)
    resid = obs.y - np.concatenate([np.full(obs.n_u, mu), np.full(obs.n_f, c * mu)])
    F = _factorize(method, Kww, Kgw, kdiag, _noise_sd(noise, obs) ** 2, resid)
    Ksw, prior = _star_cross(bk, variant, Xs, Z, target)
    As = solve_triangular(F.Lw, Ksw.T, lower=True, check_finite=False)
    v = F.A @ (resid / F.lam)
    mean = (mu if target == "u" else c * mu) + As.T @ cho_solve((F.LB, True), v, check_finite=False)
    Bs = solve_triangular(F.LB, As, lower=True, check_finite=False)
    cov = prior - As.T @ As + Bs.T @ Bs
    return mean, 0.5 * (cov + cov.T)


# -- inducing points and modular fitting ---------------------------------------
def initial_inducing(obs: ObservationSet, m_u: int, m_f: int, seed=0) -> InducingSet:
    """Starting inducing inputs.

    In 1D they sit at evenly spaced quantiles of each channel's inputs;
    otherwise they are a seeded random subset of the channel's inputs.
    """
    rng = np.random.default_rng([int(seed), 31])

    def pick(X, m):
        if m == 0:
            return np.zeros((0, obs.input_dim))
        if X.shape[0] == 0:
            raise InputError("cannot place inducing points in an empty channel")
        if obs.input_dim == 1:
            q = (np.arange(m) + 0.5) / m
            return np.quantile(X[:, 0], q).reshape(-1, 1)
        idx = rng.choice(X.shape[0], size=m, replace=m > X.shape[0])
        return X[idx].copy()

    return InducingSet(pick(obs.X_u, m_u), pick(obs.X_f, m_f))


def _box(obs, Z):
    X = np.vstack([obs.X_u, obs.X_f])
    lo, hi = X.min(axis=0), X.max(axis=0)
    d = X.shape[1]
    return [(float(lo[j % d]), float(hi[j % d])) for j in range(Z.flat().size)]


@dataclass
class InducingResult:
    Z: InducingSet
    values: dict
    objective: float
    initial_objective: float
    n_iter: int


def optimize_inducing(method, model, obs, Z0: InducingSet, init_values, maxiter=300, fd_step=1e-5):
    """Jointly optimize hyperparameters and inducing inputs.

    The objective is the sparse log likelihood plus the log prior, i.e. the
    MAP on the constrained scale. Hyperparameter gradients are analytic and
    inducing-input gradients use central differences. Inducing inputs stay
    inside the data range. The result is never worse than the start.
    """
    from .inference.model import PosteriorTarget

    method = SparseMethod(method)
    Z0.check(obs)
    base = PosteriorTarget(model, obs, jacobian=False)
    d = base.dim
    z0 = base.unconstrain(np.array([init_values[n] for n in base.names]))
    span = np.ptp(np.vstack([obs.X_u, obs.X_f]), axis=0)
    h = np.tile(fd_step * np.maximum(span, 1e-12), Z0.m)

    def sparse_ll(Z, vals):
        try:
            ll = sparse_log_marginal(method, model, obs, Z, vals)
        except (NumericalError, np.linalg.LinAlgError, InputError):
            return -np.inf
        return ll if np.isfinite(ll) else -np.inf

    def fun(v):
        z, zf = v[:d], v[d:]
        Z = Z0.with_flat(zf)
        lp, g = PosteriorTarget(model, obs, SparseLikelihood(method, Z), jacobian=False).logp_grad(z)
        if not np.isfinite(lp):
            return 1e300, np.zeros_like(v)
        vals = base.values(z)
        gz = np.zeros(zf.size)
        for j in range(zf.size):
            e = np.zeros(zf.size)
            e[j] = h[j]
            up = sparse_ll(Z0.with_flat(zf + e), vals)
            dn = sparse_ll(Z0.with_flat(zf - e), vals)
            if np.isfinite(up) and np.isfinite(dn):
                gz[j] = (up - dn) / (2 * h[j])
        return -lp, -np.concatenate([g, gz])

    v0 = np.concatenate([z0, Z0.flat()])
    f0 = fun(v0)[0]
    if f0 >= 1e300:
        raise OptimizationError("sparse objective is not finite at the starting point")
    bounds = [(None, None)] * d + _box(obs, Z0)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        res = minimize(fun, v0, jac=True, method="L-BFGS-B", bounds=bounds, options={"maxiter": maxiter})
    v = res.x if res.fun < f0 else v0
    return InducingResult(Z0.with_flat(v[d:]), base.values(v[:d]), -min(res.fun, f0), -f0, int(res.nit))


@dataclass
class SparseFit:
    """Result of the two-stage sparse fit."""

    method: SparseMethod
    model: object
    Z: InducingSet
    map_values: dict
    draws: object
    fixed_noise: dict = field(default_factory=dict)


def modular_fit(method, model, obs, m_u, m_f, hmc_config, fixed_noise=None, n_starts=5,
                seed=0, Z0: InducingSet | None = None, maxiter=300):
    """Two-stage sparse inference.

    Stage one optimizes hyperparameters and inducing inputs together: a
    multi-start MAP at the initial inducing set, then joint refinement.
    Stage two runs HMC over the hyperparameters with the inducing inputs
    frozen. ``fixed_noise`` holds noise scales at the supplied values in
    both stages.
    """
    from .inference.hmc import hmc_sample
    from .inference.model import PosteriorTarget
    from .inference.optimize import MAPConfig, map_estimate, map_inits

    method = SparseMethod(method)
    fixed_noise = dict(fixed_noise or {})
    if fixed_noise:
        bad = set(fixed_noise) - set(model.noise_names("u") + model.noise_names("f"))
        if bad:
            raise InputError(f"fixed_noise names {sorted(bad)} are not noise parameters")
        model = replace(model, fixed={**model.fixed, **fixed_noise})
    Z0 = Z0 or initial_inducing(obs, m_u, m_f, seed)
    t0 = PosteriorTarget(model, obs, SparseLikelihood(method, Z0), jacobian=False)
    m = map_estimate(t0, MAPConfig(n_starts=n_starts, seed=seed))
    opt = optimize_inducing(method, model, obs, Z0, m.values, maxiter=maxiter)
    target = PosteriorTarget(model, obs, SparseLikelihood(method, opt.Z))
    inits = map_inits(target, opt.values, hmc_config.chains, seed)
    draws = hmc_sample(target, hmc_config, inits=inits)
    return SparseFit(method, model, opt.Z, opt.values, draws, fixed_noise)


# -- plug-in noise ---------------------------------------------------------------
def _se_noise_fit(X, y, seed):
    """Noise sd of a maximum-likelihood SE GP with a constant (sample) mean."""
    spec = KernelSpec(Family.SE1D) if X.shape[1] == 1 else KernelSpec(Family.ANISO_SE2D)
    n = y.size
    r = y - float(np.mean(y))
    scale = float(np.std(y)) or 1.0
    span = np.maximum(np.ptp(X, axis=0), 1e-6)
    zero = DerivOrder.zero(X.shape[1])

    def nll(theta):
        hp = HyperParams(sigma=float(np.exp(theta[0])), lengthscales=tuple(np.exp(theta[2:])))
        K = gram_orders(spec, hp, [zero], X, X)[0][0]
        K[np.diag_indices(n)] += np.exp(2 * theta[1])
        try:
            L, _ = jitter_cholesky(K)
        except NumericalError:
            return 1e300
        a = cho_solve((L, True), r, check_finite=False)
        return float(0.5 * r @ a + np.sum(np.log(np.diag(L))) + 0.5 * n * LOG_2PI)

    rng = np.random.default_rng([int(seed), 17])
    bounds = [(np.log(1e-6 * scale), np.log(1e3 * scale)), (np.log(1e-6 * scale), np.log(10 * scale))]
    bounds += [(np.log(1e-4 * s), np.log(1e2 * s)) for s in span]
    best = None
    for k in range(4):
        noise0 = 0.1 if k == 0 else rng.uniform(0.02, 0.5)
        ell0 = np.full(span.size, 0.2) if k == 0 else rng.uniform(0.05, 0.5, span.size)
        th0 = np.concatenate([[np.log(scale), np.log(scale * noise0)], np.log(span * ell0)])
        res = minimize(nll, th0, method="L-BFGS-B", bounds=bounds)
        if best is None or res.fun < best.fun:
            best = res
    return float(np.exp(best.x[1]))


def plugin_noise(obs: ObservationSet, fraction: float = 0.5, seed=0) -> dict:
    """Noise scales from independent standard GP fits to a data subsample.

    Each channel gets its own SE-kernel GP, fitted by maximum likelihood on
    a random ``fraction`` of its points. Zero-noise groups are left out.
    Returns ``{"sigma_u": ..., "sigma_f": ...}``.
    """
    if not 0 < fraction <= 1:
        raise InputError("fraction must lie in (0, 1]")
    out = {}
    for k, (ch, X, y) in enumerate((("u", obs.X_u, obs.y_u), ("f", obs.X_f, obs.y_f))):
        keep = ~obs.group_masks(ch).get("zero", np.zeros(y.size, dtype=bool))
        X, y = X[keep], y[keep]
        if y.size < 3:
            raise InputError(f"channel {ch} has too few noisy points for a plug-in estimate")
        rng = np.random.default_rng([int(seed), 23, k])
        n = max(3, int(round(fraction * y.size)))
        idx = np.sort(rng.choice(y.size, size=n, replace=False))
        out[f"sigma_{ch}"] = _se_noise_fit(X[idx], y[idx], seed)
    return out


__all__ = [
    "SparseMethod",
    "InducingSet",
    "SparseLikelihood",
    "SparseFit",
    "InducingResult",
    "cross_covariance",
    "sparse_log_marginal",
    "sparse_predict",
    "initial_inducing",
    "optimize_inducing",
    "modular_fit",
    "plugin_noise",
]
