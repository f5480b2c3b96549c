"""Base covariance families with closed-form partial derivatives.

All families are stationary, so a mixed partial of order ``a`` in the first
argument and ``b`` in the second argument is ``(-1)**b * k^(a+b)(p - q)``
per input dimension. The radial tables ``k^(n)`` and their hyperparameter
gradients come from :mod:`pigp._backend` (compiled or numpy).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import CapabilityError, InputError


class Family(str, enum.Enum):
    SE1D = "SE1D"
    RQ1D = "RQ1D"
    PERIODIC1D = "Periodic1D"
    ANISO_SE2D = "AnisoSE2D"


_INPUT_DIM = {
    Family.SE1D: 1,
    Family.RQ1D: 1,
    Family.PERIODIC1D: 1,
    Family.ANISO_SE2D: 2,
}

# Highest supported derivative order per side, per input dimension.
_MAX_ORDER = {
    Family.SE1D: (1,),
    Family.RQ1D: (1,),
    Family.PERIODIC1D: (1,),
    Family.ANISO_SE2D: (1, 2),
}


@dataclass(frozen=True)
class KernelSpec:
    family: Family
    input_dim: int | None = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        dim = _INPUT_DIM[fam] if self.input_dim is None else int(self.input_dim)
        if dim != _INPUT_DIM[fam]:
            raise InputError(f"{fam.value} requires input_dim={_INPUT_DIM[fam]}, got {dim}")
        object.__setattr__(self, "input_dim", dim)

    @property
    def param_names(self) -> tuple[str, ...]:
        """Names of the hyperparameters, in gradient order."""
        if self.family is Family.SE1D:
            return ("sigma", "ell")
        if self.family is Family.RQ1D:
            return ("sigma", "ell", "alpha_rq")
        if self.family is Family.PERIODIC1D:
            return ("sigma", "ell", "period")
        return ("sigma", "ell_t", "ell_x")


@dataclass(frozen=True)
class HyperParams:
    """Signal scale, lengthscale(s) and the family-specific shape parameter."""

    sigma: float
    lengthscales: tuple[float, ...]
    alpha_rq: float | None = None
    period: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "lengthscales", tuple(float(v) for v in self.lengthscales))
        vals = [self.sigma, *self.lengthscales]
        vals += [v for v in (self.alpha_rq, self.period) if v is not None]
        if not all(np.isfinite(v) and v > 0 for v in vals):
            raise InputError(f"hyperparameters must be strictly positive, got {self}")

    def check(self, spec: KernelSpec) -> None:
        n_ell = spec.input_dim
        if len(self.lengthscales) != n_ell:
            raise InputError(f"{spec.family.value} needs {n_ell} lengthscale(s)")
        if (self.alpha_rq is not None) != (spec.family is Family.RQ1D):
            raise InputError("alpha_rq must be present iff family is RQ1D")
        if (self.period is not None) != (spec.family is Family.PERIODIC1D):
            raise InputError("period must be present iff family is Periodic1D")

    def as_dict(self, spec: KernelSpec) -> dict[str, float]:
        out = {"sigma": self.sigma}
        if spec.input_dim == 1:
            out["ell"] = self.lengthscales[0]
        else:
            out["ell_t"], out["ell_x"] = self.lengthscales
        if self.alpha_rq is not None:
            out["alpha_rq"] = self.alpha_rq
        if self.period is not None:
            out["period"] = self.period
        return out

    @classmethod
    def from_dict(cls, spec: KernelSpec, d) -> "HyperParams":
        if spec.input_dim == 1:
            ells = (d["ell"],)
        else:
            ells = (d["ell_t"], d["ell_x"])
        return cls(
            sigma=d["sigma"],
            lengthscales=ells,
            alpha_rq=d.get("alpha_rq") if spec.family is Family.RQ1D else None,
            period=d.get("period") if spec.family is Family.PERIODIC1D else None,
        )


@dataclass(frozen=True)
class DerivOrder:
    """Derivative multi-indices for the first (``left``) and second argument."""

    left: tuple[int, ...]
    right: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        left = tuple(int(v) for v in self.left)
        right = left if self.right is None else tuple(int(v) for v in self.right)
        if len(left) != len(right) or any(v < 0 for v in left + right):
            raise InputError(f"invalid derivative order {left}|{right}")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @classmethod
    def zero(cls, dim: int) -> "DerivOrder":
        return cls((0,) * dim, (0,) * dim)

    def check(self, spec: KernelSpec) -> None:
        if len(self.left) != spec.input_dim:
            raise InputError(f"order has {len(self.left)} dims, kernel has {spec.input_dim}")
        cap = _MAX_ORDER[spec.family]
        for a, b, m in zip(self.left, self.right, cap):
            if a > m or b > m:
                raise CapabilityError(
                    f"{spec.family.value} supports per-side orders <= {cap}, "
                    f"got {self.left}|{self.right}"
                )


def _radial(spec: KernelSpec, hp: HyperParams, r: np.ndarray, dim: int, nmax: int, grad: bool):
    """Return (D, grads) for one input dimension; grads maps name -> table."""
    fam = spec.family
    if fam is Family.SE1D:
        D, G = _backend.se_table(r, hp.lengthscales[0], nmax, grad)
        return D, ({"ell": G} if grad else {})
    if fam is Family.ANISO_SE2D:
        D, G = _backend.se_table(r, hp.lengthscales[dim], nmax, grad)
        return D, ({("ell_t", "ell_x")[dim]: G} if grad else {})
    if fam is Family.RQ1D:
        D, Gl, Ga = _backend.rq_table(r, hp.lengthscales[0], hp.alpha_rq, grad)
        return D, ({"ell": Gl, "alpha_rq": Ga} if grad else {})
    D, Gl, Gp = _backend.per_table(r, hp.lengthscales[0], hp.period, grad)
    return D, ({"ell": Gl, "period": Gp} if grad else {})


def _as_points(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1) if dim == 1 else X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != dim:
        raise InputError(f"expected points with {dim} coordinate(s), got shape {X.shape}")
    return X


def gram_orders(spec, hp, orders, P, Q, grad=False):
    """Evaluate several derivative-order Gram matrices sharing one radial pass.

    Parameters
    ----------
    spec, hp : KernelSpec, HyperParams
    orders : sequence of DerivOrder
    P, Q : array_like, shape (n, d) and (m, d)
    grad : bool
        Also return hyperparameter gradients.

    Returns
    -------
    mats : list of ndarray (n, m)
    grads : list of dict
        ``grads[i][name]`` is the derivative of ``mats[i]`` w.r.t. ``name``
        (empty dicts when ``grad`` is False).
    """
    hp.check(spec)
    dim = spec.input_dim
    P = _as_points(P, dim)
    Q = _as_points(Q, dim)
    for o in orders:
        o.check(spec)
    shape = (P.shape[0], Q.shape[0])
    tables = []
    for d in range(dim):
        nmax = max(o.left[d] + o.right[d] for o in orders)
        r = (P[:, d][:, None] - Q[:, d][None, :]).ravel()
        tables.append(_radial(spec, hp, r, d, nmax, grad))
    s2 = hp.sigma**2
    mats, grads = [], []
    for o in orders:
        factors = []
        for d in range(dim):
            n = o.left[d] + o.right[d]
            sign = -1.0 if o.right[d] % 2 else 1.0
            factors.append((sign, n))
        base = np.ones(P.shape[0] * Q.shape[0])
        for d, (sign, n) in enumerate(factors):
            base = base * (sign * tables[d][0][n])
        M = (s2 * base).reshape(shape)
        mats.append(M)
        g = {}
        if grad:
            g["sigma"] = (2.0 / hp.sigma) * M
            for d, (sign, n) in enumerate(factors):
                for name, tab in tables[d][1].items():
                    part = np.full(base.shape, s2 * sign)
                    part = part * tab[n]
                    for e, (sign_e, n_e) in enumerate(factors):
                        if e != d:
                            part = part * (sign_e * tables[e][0][n_e])
                    g[name] = part.reshape(shape)
        grads.append(g)
    return mats, grads


def gram_linear(spec, hp, coefs, P, Q, grad=False, dcoefs=None):
    """Linear combination of derivative Gram matrices sharing one radial pass.

    For a stationary family every order with the same per-dimension total
    ``a + b`` gives the same matrix up to the sign ``(-1)**b``, so callers
    pass the signed, summed coefficient per total.

    Parameters
    ----------
    coefs : mapping
        ``{totals: c}`` with ``totals`` a per-dimension tuple of ``a + b``.
    dcoefs : mapping, optional
        ``{name: {totals: dc}}``; adds ``grads[name] = sum dc * k^(totals)``.

    Returns
    -------
    M : ndarray (n, m)
    grads : dict
        Kernel hyperparameter gradients plus one entry per ``dcoefs`` name.
    """
    dim = spec.input_dim
    P = _as_points(P, dim)
    Q = _as_points(Q, dim)
    shape = (P.shape[0], Q.shape[0])
    keys = list(coefs)
    tables = []
    for d in range(dim):
        nmax = max(k[d] for k in keys)
        r = (P[:, d][:, None] - Q[:, d][None, :]).ravel()
        tables.append(_radial(spec, hp, r, d, nmax, grad))
    s2 = hp.sigma**2
    bases = {}
    for k in keys:
        b = tables[0][0][k[0]]
        for d in range(1, dim):
            b = b * tables[d][0][k[d]]
        bases[k] = b
    M = None
    for k in keys:
        c = coefs[k]
        if c != 0.0:
            M = c * bases[k] if M is None else M + c * bases[k]
    M = np.zeros(shape[0] * shape[1]) if M is None else M
    M = (s2 * M).reshape(shape)
    grads = {}
    if not grad:
        return M, grads
    grads["sigma"] = (2.0 / hp.sigma) * M
    for d in range(dim):
        for name, tab in tables[d][1].items():
            acc = None
            for k in keys:
                c = coefs[k]
                if c == 0.0:
                    continue
                part = tab[k[d]]
                for e in range(dim):
                    if e != d:
                        part = part * tables[e][0][k[e]]
                acc = c * part if acc is None else acc + c * part
            grads[name] = np.zeros(shape) if acc is None else (s2 * acc).reshape(shape)
    for name, dc in (dcoefs or {}).items():
        acc = None
        for k, v in dc.items():
            if v != 0.0:
                acc = v * bases[k] if acc is None else acc + v * bases[k]
        grads[name] = np.zeros(shape) if acc is None else (s2 * acc).reshape(shape)
    return M, grads


def gram(spec: KernelSpec, hp: HyperParams, order: DerivOrder | None, P, Q) -> np.ndarray:
    """Matrix of ``eval_kernel_derivative(spec, hp, order, P[i], Q[j])``."""
    order = order or DerivOrder.zero(spec.input_dim)
    return gram_orders(spec, hp, [order], P, Q)[0][0]


def eval_kernel_derivative(spec, hp, order: DerivOrder, p, q) -> float:
    p = _as_points(p, spec.input_dim)
    q = _as_points(q, spec.input_dim)
    if p.shape[0] != 1 or q.shape[0] != 1:
        raise InputError("eval_kernel_derivative takes single points")
    return float(gram(spec, hp, order, p, q)[0, 0])


def eval_kernel(spec: KernelSpec, hp: HyperParams, p, q) -> float:
    return eval_kernel_derivative(spec, hp, DerivOrder.zero(spec.input_dim), p, q)


def gram_diag(spec, hp, orders, P):
    """Diagonal of ``gram_orders(..., P, P)``: zero-lag values, one per order."""
    P = _as_points(P, spec.input_dim)
    zero = np.zeros((1, spec.input_dim))
    mats, _ = gram_orders(spec, hp, orders, zero, zero)
    return [np.full(P.shape[0], m[0, 0]) for m in mats]


def default_hyperparams(spec: KernelSpec) -> HyperParams:
    """Unit hyperparameters, handy for tests and examples."""
    return HyperParams(
        sigma=1.0,
        lengthscales=(1.0,) * spec.input_dim,
        alpha_rq=1.0 if spec.family is Family.RQ1D else None,
        period=1.0 if spec.family is Family.PERIODIC1D else None,
    )


def jitter_cholesky(K, start=1e-8, stop=1e-4):
    """Cholesky factor of ``K + eps * mean(diag) * I`` with escalating ``eps``.

    A jitter-free attempt comes first; then ``eps`` runs from ``start`` to
    ``stop`` in factors of ten. Returns ``(L, eps)`` with a lower-triangular
    ``L``. Raises :class:`~pigp.errors.NumericalError` when ``stop`` fails.
    """
    from scipy.linalg import lapack

    from .errors import NumericalError

    diag = np.diagonal(K)
    scale = float(diag.mean())
    if not np.isfinite(scale) or scale <= 0:
        scale = 1.0
    n = K.shape[0]
    # K is symmetric, so its transpose is a Fortran-ordered view of itself
    L, info = lapack.dpotrf(K.T, lower=1, clean=1, overwrite_a=0)
    if info == 0:
        return L, 0.0
    idx = np.diag_indices(n)
    eps = start
    while eps <= stop * (1 + 1e-9):
        Kj = np.array(K, dtype=np.float64, order="F", copy=True)
        Kj[idx] += eps * scale
        L, info = lapack.dpotrf(Kj, lower=1, clean=1)
        if info == 0:
            return L, eps
        eps *= 10.0
    raise NumericalError(
        f"matrix of size {n} not positive definite after jitter {stop:g}*mean(diag) "
        f"(mean diag {scale:.3g}, min diag {np.min(diag):.3g})"
    )


__all__ = [
    "Family",
    "KernelSpec",
    "HyperParams",
    "DerivOrder",
    "eval_kernel",
    "eval_kernel_derivative",
    "gram",
    "gram_orders",
    "gram_diag",
    "jitter_cholesky",
    "default_hyperparams",
]
