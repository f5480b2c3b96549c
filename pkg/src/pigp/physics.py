"""Linear differential operators applied to a base kernel.

For ``L u = f`` with ``u ~ GP(mu, k)`` the joint covariance blocks are

    UU(p, q) = k(p, q)
    UF(p, q) = L_q k(p, q)
    FU(p, q) = L_p k(p, q)
    FF(p, q) = L_p L_q k(p, q)

and ``mu_f = L mu``. The operator is applied generically, term by term on
each side, so the cross terms that cancel for stationary kernels are still
included.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import CapabilityError, InputError
from .kernels import DerivOrder, HyperParams, KernelSpec, gram_linear


class Block(str, enum.Enum):
    UU = "UU"
    UF = "UF"
    FU = "FU"
    FF = "FF"


@dataclass(frozen=True)
class PhysParams:
    values: Mapping[str, float]

    def __post_init__(self):
        vals = {k: float(v) for k, v in dict(self.values).items()}
        bad = {k: v for k, v in vals.items() if not (np.isfinite(v) and v >= 0)}
        if bad:
            raise InputError(f"physical parameters must be nonnegative: {bad}")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, name):
        return self.values[name]


@dataclass(frozen=True)
class Term:
    """One operator term ``coef(phi) * d^index``.

    ``dcoef(phi)`` returns the partial derivatives of the coefficient with
    respect to the named physical parameters it depends on.
    """

    coef: Callable[[PhysParams], float]
    dcoef: Callable[[PhysParams], dict]
    index: tuple[int, ...]


@dataclass(frozen=True)
class LinearOperatorSpec:
    terms: tuple[Term, ...]
    param_names: tuple[str, ...]
    name: str = "custom"

    def __post_init__(self):
        if not self.terms:
            raise InputError("operator needs at least one term")
        dims = {len(t.index) for t in self.terms}
        if len(dims) != 1:
            raise InputError("all operator terms must share the input dimension")

    @property
    def input_dim(self) -> int:
        return len(self.terms[0].index)

    def coefficients(self, phi: PhysParams):
        missing = set(self.param_names) - set(phi.values)
        if missing:
            raise InputError(f"missing physical parameters {sorted(missing)} for {self.name}")
        return [t.coef(phi) for t in self.terms]


# Coefficients are module-level functions (not lambdas) so operators pickle
# cleanly into worker processes.
def _inv_r(p):
    return 1.0 / p["R"]


def _d_inv_r(p):
    return {"R": -1.0 / p["R"] ** 2}


def _c(p):
    return p["C"]


def _d_c(p):
    return {"C": 1.0}


def _one(p):
    return 1.0


def _no_params(p):
    return {}


def _neg_alpha(p):
    return -p["alpha"]


def _d_neg_alpha(p):
    return {"alpha": -1.0}


def wk2_operator() -> LinearOperatorSpec:
    """Two-element Windkessel: ``Q = P / R + C dP/dt`` (u = P, f = Q)."""
    return LinearOperatorSpec(
        terms=(Term(_inv_r, _d_inv_r, (0,)), Term(_c, _d_c, (1,))),
        param_names=("R", "C"),
        name="wk2",
    )


def heat_operator() -> LinearOperatorSpec:
    """1D heat equation ``u_t - alpha u_xx = f`` on inputs ordered (t, x)."""
    return LinearOperatorSpec(
        terms=(Term(_one, _no_params, (1, 0)), Term(_neg_alpha, _d_neg_alpha, (0, 2))),
        param_names=("alpha",),
        name="heat",
    )


@dataclass(frozen=True)
class BlockKernel:
    spec: KernelSpec
    hp: HyperParams
    op: LinearOperatorSpec
    phi: PhysParams

    def __post_init__(self):
        if self.op.input_dim != self.spec.input_dim:
            raise InputError("operator and kernel input dimensions differ")
        self.hp.check(self.spec)
        self.op.coefficients(self.phi)


def _block_terms(op: LinearOperatorSpec, block: Block):
    """(left_index, right_index, left_term, right_term) combinations for a block."""
    dim = op.input_dim
    zero = (0,) * dim
    if block is Block.UU:
        return [(zero, zero, None, None)]
    if block is Block.UF:
        return [(zero, t.index, None, t) for t in op.terms]
    if block is Block.FU:
        return [(t.index, zero, t, None) for t in op.terms]
    return [(a.index, b.index, a, b) for a in op.terms for b in op.terms]


def block_gram(bk: BlockKernel, block, P, Q, grad: bool = False):
    """Gram matrix of one covariance block, optionally with gradients.

    Gradients are keyed by kernel hyperparameter name (``sigma``, ``ell``, ...)
    and by physical parameter name (``R``, ``C``, ``alpha``).
    """
    block = Block(block)
    combos = _block_terms(bk.op, block)
    _check_orders(bk.spec, block, combos)
    phi = bk.phi
    # Every (left term, right term) pair is kept. For a stationary base the
    # pair contributes sign * cl * cr * k^(a+b), so pairs sharing a+b are
    # summed into one coefficient before any matrix work.
    coefs: dict[tuple, float] = {}
    dcoefs: dict[str, dict] = {}
    for left, right, lt, rt in combos:
        key = tuple(a + b for a, b in zip(left, right))
        sign = -1.0 if sum(right) % 2 else 1.0
        cl = lt.coef(phi) if lt is not None else 1.0
        cr = rt.coef(phi) if rt is not None else 1.0
        coefs[key] = coefs.get(key, 0.0) + sign * cl * cr
        if not grad:
            continue
        dw: dict[str, float] = {}
        if lt is not None:
            for k, v in lt.dcoef(phi).items():
                dw[k] = dw.get(k, 0.0) + v * cr
        if rt is not None:
            for k, v in rt.dcoef(phi).items():
                dw[k] = dw.get(k, 0.0) + cl * v
        for k, v in dw.items():
            d = dcoefs.setdefault(k, {})
            d[key] = d.get(key, 0.0) + sign * v
    out, grads = gram_linear(bk.spec, bk.hp, coefs, P, Q, grad=grad, dcoefs=dcoefs)
    if grad:
        for name in (*bk.spec.param_names, *bk.op.param_names):
            if name not in grads:
                grads[name] = np.zeros_like(out)
    return out, grads


_CHECKED: set = set()


def _check_orders(spec, block, combos):
    key = (spec.family, block, tuple((l, r) for l, r, _, _ in combos))
    if key in _CHECKED:
        return
    for left, right, _, _ in combos:
        DerivOrder(left, right).check(spec)
    _CHECKED.add(key)


def block_eval(bk: BlockKernel, block, p, q) -> float:
    P = np.atleast_2d(np.asarray(p, dtype=float).reshape(1, -1))
    Q = np.atleast_2d(np.asarray(q, dtype=float).reshape(1, -1))
    return float(block_gram(bk, block, P, Q)[0][0, 0])


def block_diag(bk: BlockKernel, block, P, grad: bool = False):
    """Diagonal ``block(P[i], P[i])`` for the stationary base families."""
    block = Block(block)
    n = np.asarray(P).shape[0]
    zero = np.zeros((1, bk.spec.input_dim))
    M, g = block_gram(bk, block, zero, zero, grad=grad)
    diag = np.full(n, M[0, 0])
    return diag, {k: np.full(n, v[0, 0]) for k, v in g.items()}


@dataclass(frozen=True)
class ConstantMean:
    value: float

    def __call__(self, X):
        return np.full(np.asarray(X).shape[0], float(self.value))


@dataclass(frozen=True)
class PolynomialMean:
    """Polynomial in the first input coordinate, ``sum_k coeffs[k] * x**k``."""

    coeffs: tuple[float, ...]

    def __call__(self, X):
        x = np.asarray(X, dtype=float).reshape(np.asarray(X).shape[0], -1)[:, 0]
        return np.polynomial.polynomial.polyval(x, np.asarray(self.coeffs, dtype=float))


@dataclass(frozen=True)
class _OperatorMean:
    parts: tuple

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape[0])
        for c, fn in self.parts:
            out += c * fn(X)
        return out


def mean_f(mu_u, op: LinearOperatorSpec, phi: PhysParams):
    """Mean of the forcing channel, ``L mu_u``, as a callable of the inputs."""
    coefs = op.coefficients(phi)
    if isinstance(mu_u, (int, float)):
        mu_u = ConstantMean(float(mu_u))
    if isinstance(mu_u, ConstantMean):
        c = sum(cf for cf, t in zip(coefs, op.terms) if not any(t.index))
        return ConstantMean(c * mu_u.value)
    if isinstance(mu_u, PolynomialMean):
        parts = []
        for cf, t in zip(coefs, op.terms):
            if any(t.index[1:]):
                continue  # polynomial only in the first coordinate
            d = np.polynomial.polynomial.polyder(np.asarray(mu_u.coeffs, dtype=float), t.index[0])
            parts.append((cf, PolynomialMean(tuple(d) if len(d) else (0.0,))))
        return _OperatorMean(tuple(parts))
    raise CapabilityError(f"unsupported mean family {type(mu_u).__name__}")


def mean_f_scale(op: LinearOperatorSpec, phi: PhysParams):
    """``(c, dc)`` with ``L(const m) = c * m`` and ``dc[name] = dc/dname``."""
    c = 0.0
    dc: dict[str, float] = {}
    for t in op.terms:
        if any(t.index):
            continue
        c += t.coef(phi)
        for k, v in t.dcoef(phi).items():
            dc[k] = dc.get(k, 0.0) + v
    return c, dc
