"""Model description, parameter layout and the log posterior.

A :class:`PIModel` names every parameter of a physics-informed GP: the
physical parameters, an optional free constant mean ``mu``, the base kernel
hyperparameters, the discrepancy/bias kernel hyperparameters (prefixed
``delta.`` or ``bias.``) and the noise scales ``sigma_u`` / ``sigma_f``
(suffixed ``.group`` when there are several noise groups).

Any parameter may be held fixed. Free parameters are sampled on an
unconstrained scale through the transform attached to their prior.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from ..errors import InputError, NumericalError
from ..gp import (
    LOG_2PI,
    JointGaussian,
    ModelVariant,
    NoiseParams,
    ObservationSet,
    VariantKind,
    gaussian_loglik_grad,
    latent_covariance,
    log_marginal,
    noise_sd,
)
from ..kernels import Family, HyperParams, KernelSpec
from ..physics import BlockKernel, LinearOperatorSpec, PhysParams, mean_f_scale

EXTRA_PREFIX = {VariantKind.DISCREPANCY: "delta", VariantKind.BIAS: "bias"}


@dataclass(frozen=True)
class PIModel:
    """Complete description of a physics-informed GP model.

    Parameters
    ----------
    kernel : KernelSpec
        Base kernel on u.
    operator : LinearOperatorSpec
    priors : mapping
        Prior per parameter name; every free parameter needs one.
    variant : VariantKind
    extra_kernel : KernelSpec, optional
        Discrepancy or bias kernel (u channel only).
    tie_period : bool
        A periodic extra kernel reuses the base kernel's ``period``.
    mean : "free" or float
        ``"free"`` adds a constant-mean parameter ``mu``; a number fixes it.
    fixed : mapping
        Parameter values held constant.
    noise_groups_u, noise_groups_f : tuple of str
        Noise groups with their own sd (the ``"zero"`` group never needs one).
    """

    kernel: KernelSpec
    operator: LinearOperatorSpec
    priors: Mapping[str, object] = field(default_factory=dict)
    variant: VariantKind = VariantKind.PLAIN
    extra_kernel: KernelSpec | None = None
    tie_period: bool = True
    mean: str | float = "free"
    fixed: Mapping[str, float] = field(default_factory=dict)
    noise_groups_u: tuple[str, ...] = ("0",)
    noise_groups_f: tuple[str, ...] = ("0",)

    def __post_init__(self):
        object.__setattr__(self, "variant", VariantKind(self.variant))
        object.__setattr__(self, "priors", dict(self.priors))
        object.__setattr__(self, "fixed", {k: float(v) for k, v in dict(self.fixed).items()})
        object.__setattr__(self, "noise_groups_u", tuple(self.noise_groups_u))
        object.__setattr__(self, "noise_groups_f", tuple(self.noise_groups_f))
        if (self.extra_kernel is None) != (self.variant is VariantKind.PLAIN):
            raise InputError("extra_kernel must be given iff the variant is not plain")
        if self.operator.input_dim != self.kernel.input_dim:
            raise InputError("operator and kernel input dimensions differ")
        if self.mean != "free" and not isinstance(self.mean, (int, float)):
            raise InputError(f"mean must be 'free' or a number, got {self.mean!r}")
        unknown = set(self.fixed) - set(self.all_names)
        if unknown:
            raise InputError(f"fixed values for unknown parameters {sorted(unknown)}")
        missing = [n for n in self.free_names if n not in self.priors]
        if missing:
            raise InputError(f"no prior for free parameters {missing}")

    # -- naming -----------------------------------------------------------
    @property
    def extra_prefix(self) -> str | None:
        return EXTRA_PREFIX.get(self.variant)

    def _shared_period(self) -> bool:
        return (
            self.tie_period
            and self.extra_kernel is not None
            and self.extra_kernel.family is Family.PERIODIC1D
            and self.kernel.family is Family.PERIODIC1D
        )

    def extra_param_name(self, name: str) -> str:
        if name == "period" and self._shared_period():
            return "period"
        return f"{self.extra_prefix}.{name}"

    def noise_names(self, channel: str) -> list[str]:
        groups = self.noise_groups_u if channel == "u" else self.noise_groups_f
        base = f"sigma_{channel}"
        groups = [g for g in groups if g != "zero"]
        if list(groups) == ["0"]:
            return [base]
        return [f"{base}.{g}" for g in groups]

    @property
    def all_names(self) -> list[str]:
        names = list(self.operator.param_names)
        if self.mean == "free":
            names.append("mu")
        names += list(self.kernel.param_names)
        if self.extra_kernel is not None:
            for n in self.extra_kernel.param_names:
                full = self.extra_param_name(n)
                if full not in names:
                    names.append(full)
        names += self.noise_names("u") + self.noise_names("f")
        return names

    @property
    def free_names(self) -> list[str]:
        return [n for n in self.all_names if n not in self.fixed]

    @property
    def n_params(self) -> int:
        return len(self.free_names)

    # -- assembly ---------------------------------------------------------
    def _noise_value(self, values, channel):
        names = self.noise_names(channel)
        base = f"sigma_{channel}"
        if names == [base]:
            return float(values[base])
        return {n.split(".", 1)[1]: float(values[n]) for n in names}

    def mean_value(self, values) -> float:
        return float(values["mu"]) if self.mean == "free" else float(self.mean)

    def build(self, values: Mapping[str, float]):
        """Turn a full name->value mapping into model objects.

        Returns ``(BlockKernel, ModelVariant, NoiseParams, mu)``.
        """
        vals = {**self.fixed, **values}
        phi = PhysParams({n: vals[n] for n in self.operator.param_names})
        hp = HyperParams.from_dict(self.kernel, {n: vals[n] for n in self.kernel.param_names})
        bk = BlockKernel(self.kernel, hp, self.operator, phi)
        if self.extra_kernel is not None:
            d = {n: vals[self.extra_param_name(n)] for n in self.extra_kernel.param_names}
            variant = ModelVariant(self.variant, self.extra_kernel, HyperParams.from_dict(self.extra_kernel, d))
        else:
            variant = ModelVariant()
        noise = NoiseParams(self._noise_value(vals, "u"), self._noise_value(vals, "f"))
        return bk, variant, noise, self.mean_value(vals)

    def piece_name(self, name: str) -> str:
        if name.startswith("extra."):
            return self.extra_param_name(name[len("extra."):])
        return name

    def check_groups(self, obs: ObservationSet) -> None:
        for ch, declared in (("u", self.noise_groups_u), ("f", self.noise_groups_f)):
            extra = set(obs.groups(ch)) - set(declared)
            if extra:
                raise InputError(f"observations use undeclared {ch} noise groups {sorted(extra)}")


def exact_loglik(model: PIModel, obs: ObservationSet, values, grad: bool = True,
                 collapse_replicates: bool = True):
    """Exact log marginal likelihood and its gradient by parameter name.

    With ``collapse_replicates`` the observations sharing an input and a
    noise group are replaced by their mean with variance ``s^2 / r``. The
    likelihood is unchanged: the replicates factor as
    ``N(ybar | g, s^2/r) (2 pi s^2)^{-(r-1)/2} r^{-1/2} exp(-SS / (2 s^2))``.
    """
    vals = {**model.fixed, **values}
    bk, variant, noise, mu = model.build(vals)
    sd_u = noise_sd(noise, obs, "u")
    sd_f = noise_sd(noise, obs, "f")
    free = set(model.free_names) if grad else set()
    diag_pieces = noise_diag_pieces(model, obs, noise, sd_u, sd_f, free)
    rep = obs.replicate_summary() if collapse_replicates else None
    extra_ll = 0.0
    extra_grad: dict[str, float] = {}
    if rep is not None:
        var = []
        for ch, sd in (("u", sd_u), ("f", sd_f)):
            r = rep[ch]
            s2 = sd[r["first"]] ** 2
            var.append(s2 / r["count"])
            k = r["count"] - 1.0
            extra_ll += float(np.sum(-0.5 * k * (LOG_2PI + np.log(s2)) - 0.5 * np.log(r["count"]) - 0.5 * r["ss"] / s2))
            dlds2 = -0.5 * k / s2 + 0.5 * r["ss"] / s2**2
            for name, (pch, v) in list(diag_pieces.items()):
                if pch == ch:
                    vr = v[r["first"]]
                    extra_grad[name] = extra_grad.get(name, 0.0) + float(dlds2 @ vr)
                    diag_pieces[name] = (ch, vr / r["count"])
        obs = rep["obs"]
        var = np.concatenate(var)
    else:
        var = np.concatenate([sd_u, sd_f]) ** 2
    K, pieces = latent_covariance(bk, variant, obs.X_u, obs.X_f, grad=grad)
    K.flat[:: K.shape[0] + 1] += var
    c, dc = mean_f_scale(model.operator, bk.phi)
    n_u, n_f = obs.n_u, obs.n_f
    mean = np.concatenate([np.full(n_u, mu), np.full(n_f, c * mu)])
    if not grad:
        return log_marginal(JointGaussian(mean, K, n_u), obs.y) + extra_ll, {}
    named = {}
    for k, plist in pieces.items():
        full = model.piece_name(k)
        if full in free:
            named.setdefault(full, []).extend(plist)
    mean_pieces = {}
    if "mu" in free:
        mean_pieces["mu"] = np.concatenate([np.ones(n_u), np.full(n_f, c)])
    for k, v in dc.items():
        if k in free and mu != 0.0:
            mean_pieces[k] = np.concatenate([np.zeros(n_u), np.full(n_f, v * mu)])
    ll, grads = gaussian_loglik_grad(K, obs.y - mean, n_u, named, diag_pieces, mean_pieces)
    for k, v in extra_grad.items():
        grads[k] = grads.get(k, 0.0) + v
    return ll + extra_ll, grads


def noise_diag_pieces(model, obs, noise, sd_u, sd_f, free):
    """``name -> (channel, d(sd_i^2)/d(name))`` for the free noise scales."""
    out = {}
    for ch, sd in (("u", sd_u), ("f", sd_f)):
        masks = obs.group_masks(ch)
        for name in model.noise_names(ch):
            if name not in free:
                continue
            if "." in name:
                g = name.split(".", 1)[1]
                mask = masks.get(g, np.zeros(sd.size, dtype=bool))
            else:
                g = "0"
                mask = ~masks["zero"] if "zero" in masks else np.ones(sd.size, dtype=bool)
            s = noise.for_group(ch, g)
            # the floor makes d(sd)/d(sigma) zero where it binds
            active = mask & (sd == s) & (s > 0)
            out[name] = (ch, np.where(active, 2.0 * s, 0.0))
    return out


Likelihood = Callable[[PIModel, ObservationSet, Mapping[str, float], bool], tuple]


class PosteriorTarget:
    """Log posterior on the unconstrained scale, with gradient.

    Parameters
    ----------
    model : PIModel
    obs : ObservationSet
    likelihood : callable, optional
        ``likelihood(model, obs, values, grad) -> (ll, grads)``; defaults to
        the exact likelihood. Sparse approximations plug in here.
    use_likelihood : bool
        Switch the data term off to sample the prior.
    jacobian : bool
        Include the log-Jacobian of the transforms. MAP estimation drops it
        so the optimum is the mode on the constrained scale.
    """

    def __init__(self, model: PIModel, obs: ObservationSet, likelihood: Likelihood | None = None,
                 use_likelihood: bool = True, jacobian: bool = True):
        model.check_groups(obs)
        self.model = model
        self.obs = obs
        self.likelihood = likelihood or exact_loglik
        self.use_likelihood = use_likelihood
        self.jacobian = jacobian
        self.names = list(model.free_names)
        self.priors = [model.priors[n] for n in self.names]
        self.n_failures = 0

    @property
    def dim(self) -> int:
        return len(self.names)

    def constrain(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.array([p.to_constrained(float(v)) for p, v in zip(self.priors, z)])

    def unconstrain(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([p.to_unconstrained(float(v)) for p, v in zip(self.priors, x)])

    def values(self, z) -> dict:
        return {**self.model.fixed, **dict(zip(self.names, self.constrain(z)))}

    def _in_support(self, x) -> bool:
        # transforms can round onto a boundary at extreme z
        for p, v in zip(self.priors, x):
            if p.support == "interval" and not (p.low < v < p.high):
                return False
            if p.support == "positive" and not v > 0:
                return False
        return bool(np.all(np.isfinite(x)))

    def logp_grad(self, z):
        """Return ``(logp, grad)``; ``logp = -inf`` flags a numerical failure."""
        # far-out trial points overflow harmlessly; the finiteness checks catch them
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return self._logp_grad(z)

    def _logp_grad(self, z):
        z = np.asarray(z, dtype=float)
        x = self.constrain(z)
        if not self._in_support(x):
            self.n_failures += 1
            return -np.inf, np.zeros_like(z)
        lp = 0.0
        gx = np.zeros_like(z)
        for i, (p, v) in enumerate(zip(self.priors, x)):
            lp += p.logpdf(v)
            gx[i] = p.dlogpdf(v)
        if self.use_likelihood:
            try:
                ll, g = self.likelihood(self.model, self.obs, dict(zip(self.names, x)), True)
            except (NumericalError, np.linalg.LinAlgError, FloatingPointError, InputError):
                self.n_failures += 1
                return -np.inf, np.zeros_like(z)
            if not np.isfinite(ll):
                self.n_failures += 1
                return -np.inf, np.zeros_like(z)
            lp += ll
            for i, n in enumerate(self.names):
                gx[i] += g.get(n, 0.0)
        dxdz = np.array([p.dx_dz(float(v)) for p, v in zip(self.priors, z)])
        gz = gx * dxdz
        if self.jacobian:
            for i, (p, v) in enumerate(zip(self.priors, z)):
                lp += p.log_jacobian(float(v))
                gz[i] += p.dlog_jacobian(float(v))
        if not (np.isfinite(lp) and np.all(np.isfinite(gz))):
            self.n_failures += 1
            return -np.inf, np.zeros_like(z)
        return float(lp), gz

    def logp(self, z) -> float:
        return self.logp_grad(z)[0]

    def init_point(self, rng, radius: float = 2.0) -> np.ndarray:
        return rng.uniform(-radius, radius, self.dim)

    def prior_point(self, rng) -> np.ndarray:
        """Unconstrained image of a prior draw, nudged off the boundaries."""
        x = []
        for p in self.priors:
            v = float(p.sample(rng))
            if p.support == "interval":
                w = p.high - p.low
                v = min(max(v, p.low + 1e-6 * w), p.high - 1e-6 * w)
            elif p.support == "positive":
                v = max(v, 1e-8)
            x.append(v)
        return self.unconstrain(np.array(x))


def log_posterior(model, obs, z, likelihood=None) -> float:
    return PosteriorTarget(model, obs, likelihood).logp(z)


def grad_log_posterior(model, obs, z, likelihood=None) -> np.ndarray:
    return PosteriorTarget(model, obs, likelihood).logp_grad(z)[1]
