"""Fit, predict and summarize: the pipeline shared by the CLI and the studies.

:func:`run_fit` takes a model, observations and an ``inference`` block and
returns a :class:`FitResult`. :func:`predict_mixture` averages per-draw
Gaussian predictions into a posterior predictive mean and band, and
:func:`summarize` builds the seed-deterministic summary record.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError
from .gp import ObservationSet, predict_f, predict_u
from .inference import (
    HMCConfig,
    MAPConfig,
    PosteriorDraws,
    PosteriorTarget,
    diagnostics,
    hmc_sample,
    map_estimate,
    map_inits,
)
from .sparse import InducingSet, SparseMethod, modular_fit, plugin_noise, sparse_predict

METHODS = ("exact", "map", "fitc", "vfe")

INFERENCE_DEFAULTS = {
    "method": "exact",
    "chains": 3,
    "warmup": 1000,
    "iters": 1000,
    "target_accept": 0.8,
    "n_leapfrog": 32,
    "n_starts": 5,
    "m_u": 8,
    "m_f": 10,
    "fixed_noise": None,
    "plugin_fraction": 0.5,
    "inducing_maxiter": 300,
}


@dataclass
class FitResult:
    method: str
    model: object
    obs: ObservationSet
    map_values: dict
    draws: PosteriorDraws | None = None
    inducing: InducingSet | None = None
    fixed_noise: dict = field(default_factory=dict)
    map_logp: float | None = None
    runtime: float = 0.0

    @property
    def names(self) -> list[str]:
        return list(self.model.free_names)

    def param_sets(self, max_draws: int = 200) -> list[dict]:
        """Up to ``max_draws`` evenly thinned posterior draws, or the MAP alone."""
        if self.draws is None:
            return [dict(self.map_values)]
        flat = self.draws.flat()
        k = min(int(max_draws), flat.shape[0])
        idx = np.unique(np.linspace(0, flat.shape[0] - 1, k).round().astype(int))
        names = self.draws.names
        return [dict(zip(names, map(float, flat[i]))) for i in idx]


def inference_settings(block: dict | None) -> dict:
    """Inference block merged over the defaults, with basic validation."""
    cfg = {**INFERENCE_DEFAULTS, **(block or {})}
    if cfg["method"] not in METHODS:
        raise ConfigError(f"unknown inference method {cfg['method']!r}; choose from {METHODS}")
    fn = cfg["fixed_noise"]
    if fn is not None and fn != "plugin" and not isinstance(fn, dict):
        raise ConfigError("fixed_noise must be null, \"plugin\" or an object of noise values")
    return cfg


def _hmc_config(cfg, seed, threads) -> HMCConfig:
    return HMCConfig(chains=int(cfg["chains"]), warmup=int(cfg["warmup"]), iters=int(cfg["iters"]),
                     target_accept=float(cfg["target_accept"]), n_leapfrog=int(cfg["n_leapfrog"]),
                     seed=int(seed), threads=int(threads))


def resolve_fixed_noise(cfg, obs, seed) -> dict:
    fn = cfg["fixed_noise"]
    if fn is None:
        return {}
    if fn == "plugin":
        return plugin_noise(obs, fraction=float(cfg["plugin_fraction"]), seed=seed)
    return {k: float(v) for k, v in fn.items()}


def run_fit(model, obs: ObservationSet, inference: dict | None = None, seed: int = 0,
            threads: int = 1) -> FitResult:
    """Fit ``model`` to ``obs``.

    Methods: ``exact`` (multi-start MAP, then HMC started near the MAP),
    ``map`` (point estimate only), ``fitc`` and ``vfe`` (modular sparse fit).
    """
    cfg = inference_settings(inference)
    t0 = time.perf_counter()
    method = cfg["method"]
    fixed = resolve_fixed_noise(cfg, obs, seed)
    hmc_cfg = _hmc_config(cfg, seed, threads)
    if method in ("fitc", "vfe"):
        sf = modular_fit(SparseMethod(method), model, obs, int(cfg["m_u"]), int(cfg["m_f"]), hmc_cfg,
                         fixed_noise=fixed or None, n_starts=int(cfg["n_starts"]), seed=seed,
                         maxiter=int(cfg["inducing_maxiter"]))
        return FitResult(method, sf.model, obs, sf.map_values, sf.draws, sf.Z, fixed,
                         runtime=time.perf_counter() - t0)
    if fixed:
        bad = set(fixed) - set(model.noise_names("u") + model.noise_names("f"))
        if bad:
            raise ConfigError(f"fixed_noise names {sorted(bad)} are not noise parameters")
        model = replace(model, fixed={**model.fixed, **fixed})
    mode = map_estimate(PosteriorTarget(model, obs, jacobian=False),
                        MAPConfig(n_starts=int(cfg["n_starts"]), seed=seed))
    draws = None
    if method == "exact":
        target = PosteriorTarget(model, obs)
        inits = map_inits(target, mode.values, hmc_cfg.chains, seed)
        draws = hmc_sample(target, hmc_cfg, inits=inits)
    return FitResult(method, model, obs, mode.values, draws, None, fixed, mode.logp,
                     runtime=time.perf_counter() - t0)


# -- prediction -------------------------------------------------------------------
def mixture_quantiles(means, sds, probs, tol=1e-10, max_iter=200) -> np.ndarray:
    """Quantiles of equally weighted Gaussian mixtures, one mixture per column.

    ``means`` and ``sds`` have shape (components, points). Solved by
    bisection on the mixture CDF. Returns shape (len(probs), points).
    """
    M = np.atleast_2d(np.asarray(means, float))
    S = np.maximum(np.atleast_2d(np.asarray(sds, float)), 1e-300)
    out = np.empty((len(probs), M.shape[1]))
    for j, p in enumerate(probs):
        lo = (M - 10.0 * S).min(axis=0)
        hi = (M + 10.0 * S).max(axis=0)
        scale = np.maximum(hi - lo, 1e-300)
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            below = ndtr((mid - M) / S).mean(axis=0) < p
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= tol * scale):
                break
        out[j] = 0.5 * (lo + hi)
    return out


def predict_one(fit: FitResult, values: dict, Xstar, target="u", noise_override=None):
    """Latent mean and marginal sd at ``Xstar`` for one parameter set."""
    if fit.inducing is not None:
        mean, cov = sparse_predict(fit.method, fit.model, fit.obs, fit.inducing, values, Xstar,
                                   target=target, noise_override=noise_override)
    else:
        vals = {**fit.model.fixed, **values, **(noise_override or {})}
        bk, variant, noise, mu = fit.model.build(vals)
        fn = predict_u if target == "u" else predict_f
        mean, cov = fn(bk, variant, noise, fit.obs, Xstar, mu)
    return mean, np.sqrt(np.maximum(np.diag(cov), 0.0))


def predict_mixture(fit: FitResult, Xstar, target="u", max_draws=200, noise_override=None,
                    level=0.9) -> dict:
    """Posterior predictive of the latent output, averaged over draws.

    Each retained draw contributes a Gaussian; the band holds the central
    ``level`` quantiles of the resulting mixture. The band describes the
    latent function, so observation noise is not added.
    """
    sets = fit.param_sets(max_draws)
    pairs = [predict_one(fit, v, Xstar, target, noise_override) for v in sets]
    M = np.array([p[0] for p in pairs])
    S = np.array([p[1] for p in pairs])
    a = 0.5 * (1.0 - level)
    lo, hi = mixture_quantiles(M, S, [a, 1.0 - a])
    mean = M.mean(axis=0)
    var = (S ** 2 + M ** 2).mean(axis=0) - mean ** 2
    return {"mean": mean, "sd": np.sqrt(np.maximum(var, 0.0)), "lower": lo, "upper": hi,
            "n_draws": len(sets)}


def rmse(pred, truth) -> float:
    pred, truth = np.asarray(pred, float), np.asarray(truth, float)
    return float(np.sqrt(np.mean((pred - truth) ** 2)))


def default_grid(obs: ObservationSet, truth: dict | None = None) -> np.ndarray:
    """Evaluation inputs: 100 times over one cycle, or a 20 x 20 grid in 2D."""
    if obs.input_dim == 1:
        if truth and "inflow" in truth:
            period = float(truth["inflow"]["period"])
            return np.linspace(0.0, period, 100, endpoint=False)[:, None]
        X = np.vstack([obs.X_u, obs.X_f])
        return np.linspace(X.min(), X.max(), 100)[:, None]
    X = np.vstack([obs.X_u, obs.X_f])
    lo, hi = (0.0, 0.0), (1.0, 1.0)
    if not (truth and truth.get("kind") == "heat"):
        lo, hi = X.min(axis=0), X.max(axis=0)
    g_t, g_x = np.meshgrid(np.linspace(lo[0], hi[0], 20), np.linspace(lo[1], hi[1], 20), indexing="ij")
    return np.column_stack([g_t.ravel(), g_x.ravel()])


# -- summaries --------------------------------------------------------------------
def summarize(fit: FitResult) -> dict:
    """Seed-deterministic record of a fit (no wall-clock fields)."""
    out = {
        "method": fit.method,
        "n_params": len(fit.names),
        "fixed": dict(fit.model.fixed),
        "map": {k: fit.map_values[k] for k in fit.names if k in fit.map_values},
    }
    if fit.map_logp is not None:
        out["map_logp"] = fit.map_logp
    if fit.draws is not None:
        s = fit.draws.summary()
        dg = diagnostics(fit.draws)
        params = {}
        for n in fit.draws.names:
            params[n] = {**s[n], "ess": dg["ess"][n]}
            if dg["rhat"] is not None:
                params[n]["rhat"] = dg["rhat"][n]
        out["params"] = params
        out["sampler"] = {
            "chains": int(fit.draws.draws.shape[0]),
            "iters": int(fit.draws.draws.shape[1]),
            "n_divergent": fit.draws.n_divergent,
            "mean_accept": fit.draws.mean_accept,
            "step_size": [float(e) for e in fit.draws.step_size],
            "max_rhat": max(dg["rhat"].values()) if dg["rhat"] else None,
            "min_ess": min(dg["ess"].values()),
        }
    else:
        out["params"] = {n: {"mean": fit.map_values[n]} for n in fit.names}
    if fit.inducing is not None:
        out["inducing"] = {"m_u": fit.inducing.m_u, "m_f": fit.inducing.m_f}
    return out


def interval(fit: FitResult, name: str, level=0.9):
    """Central credible interval of one parameter from the draws."""
    if fit.draws is None:
        v = fit.map_values[name]
        return v, v
    a = 0.5 * (1.0 - level)
    lo, hi = np.quantile(fit.draws.flat()[:, fit.draws.names.index(name)], [a, 1.0 - a])
    return float(lo), float(hi)


def posterior_mean(fit: FitResult, name: str) -> float:
    if fit.draws is None:
        return float(fit.map_values[name])
    return float(fit.draws.param(name).mean())


__all__ = [
    "METHODS",
    "INFERENCE_DEFAULTS",
    "FitResult",
    "inference_settings",
    "run_fit",
    "mixture_quantiles",
    "predict_one",
    "predict_mixture",
    "rmse",
    "default_grid",
    "summarize",
    "interval",
    "posterior_mean",
]
