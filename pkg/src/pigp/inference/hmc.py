"""Adaptive Hamiltonian Monte Carlo.

Static-path HMC with a jittered number of leapfrog steps, dual-averaging
step-size adaptation and a diagonal mass matrix estimated in expanding
windows during warmup (the usual fast/slow/fast schedule).

Each chain draws from its own ``default_rng([seed, chain])`` stream, so
running chains in worker processes gives the same draws as running them
in sequence.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError, SamplingError


@dataclass(frozen=True)
class HMCConfig:
    chains: int = 3
    warmup: int = 1000
    iters: int = 1000
    target_accept: float = 0.8
    seed: int = 0
    n_leapfrog: int = 32
    jitter_low: float = 0.8
    max_energy_error: float = 1000.0
    init_radius: float = 2.0
    threads: int = 1

    def check(self, strict: bool = True) -> None:
        if self.chains < 1:
            raise InputError("need at least one chain")
        if strict and (self.warmup < 100 or self.iters < 100):
            raise InputError(f"warmup and iters must be >= 100 (got {self.warmup}, {self.iters})")
        if not 0.0 < self.target_accept < 1.0:
            raise InputError("target_accept must lie in (0, 1)")
        if self.n_leapfrog < 1:
            raise InputError("n_leapfrog must be positive")


@dataclass
class PosteriorDraws:
    """Post-warmup draws on the constrained scale.

    ``draws`` has shape (chains, iters, params).
    """

    names: list[str]
    draws: np.ndarray
    accept_stat: np.ndarray
    divergent: np.ndarray
    step_size: np.ndarray
    step_size_trace: np.ndarray
    logp: np.ndarray
    inv_mass: np.ndarray = field(default=None)

    @property
    def n_divergent(self) -> int:
        return int(self.divergent.sum())

    @property
    def mean_accept(self) -> float:
        return float(self.accept_stat.mean())

    def flat(self) -> np.ndarray:
        return self.draws.reshape(-1, self.draws.shape[-1])

    def param(self, name: str) -> np.ndarray:
        return self.draws[:, :, self.names.index(name)]

    def summary(self) -> dict:
        """Mean, sd and 5/50/95% quantiles per parameter."""
        flat = self.flat()
        out = {}
        for i, n in enumerate(self.names):
            v = flat[:, i]
            q = np.quantile(v, [0.05, 0.5, 0.95])
            out[n] = {
                "mean": float(v.mean()),
                "sd": float(v.std(ddof=1)) if v.size > 1 else 0.0,
                "q05": float(q[0]),
                "q50": float(q[1]),
                "q95": float(q[2]),
            }
        return out


class _DualAveraging:
    def __init__(self, eps0, target, gamma=0.05, t0=10.0, kappa=0.75):
        self.mu = math.log(10.0 * eps0)
        self.target = target
        self.gamma, self.t0, self.kappa = gamma, t0, kappa
        self.h_bar = 0.0
        self.log_eps_bar = 0.0
        self.t = 0

    def update(self, accept):
        self.t += 1
        t = self.t
        w = 1.0 / (t + self.t0)
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target - accept)
        log_eps = self.mu - math.sqrt(t) / self.gamma * self.h_bar
        eta = t ** (-self.kappa)
        self.log_eps_bar = eta * log_eps + (1.0 - eta) * self.log_eps_bar
        return math.exp(log_eps)

    @property
    def final(self):
        return math.exp(self.log_eps_bar)


def _windows(warmup):
    """Ends of the slow (mass-matrix) adaptation windows, Stan's schedule."""
    init, term, base = 75, 50, 25
    if init + term + base > warmup:
        init = int(0.15 * warmup)
        term = int(0.1 * warmup)
        base = warmup - init - term
    ends = []
    start, size = init, base
    end_slow = warmup - term
    while start < end_slow:
        end = start + size
        if end + 2 * size > end_slow:
            end = end_slow
        ends.append((start, end))
        start, size = end, 2 * size
    return ends


def _leapfrog(target, z, p, g, eps, inv_m, n):
    p = p + 0.5 * eps * g
    lp = None
    for i in range(n):
        z = z + eps * inv_m * p
        lp, g = target.logp_grad(z)
        if not np.isfinite(lp):
            return z, p, -np.inf, g
        if i < n - 1:
            p = p + eps * g
    p = p + 0.5 * eps * g
    return z, p, lp, g


def _kinetic(p, inv_m):
    with np.errstate(over="ignore"):  # a runaway trajectory gives inf, i.e. a divergence
        return 0.5 * float(np.sum(inv_m * p * p))


def _transition(target, rng, z, lp, g, eps, inv_m, cfg):
    n = max(1, int(round(rng.uniform(cfg.jitter_low, 1.0) * cfg.n_leapfrog)))
    p0 = rng.standard_normal(z.size) / np.sqrt(inv_m)
    h0 = -lp + _kinetic(p0, inv_m)
    z1, p1, lp1, g1 = _leapfrog(target, z, p0, g, eps, inv_m, n)
    u = rng.uniform()
    if not np.isfinite(lp1):
        return z, lp, g, 0.0, True
    h1 = -lp1 + _kinetic(p1, inv_m)
    dh = h1 - h0
    if not np.isfinite(dh) or dh > cfg.max_energy_error:
        return z, lp, g, 0.0, True
    accept = min(1.0, math.exp(-dh)) if dh > 0 else 1.0
    if u < accept:
        return z1, lp1, g1, accept, False
    return z, lp, g, accept, False


def _find_eps(target, rng, z, lp, g, inv_m):
    """Double or halve the step until a single leapfrog crosses acceptance 1/2."""
    eps = 0.1
    p = rng.standard_normal(z.size) / np.sqrt(inv_m)
    h0 = -lp + _kinetic(p, inv_m)

    def log_ratio(e):
        z1, p1, lp1, _ = _leapfrog(target, z, p, g, e, inv_m, 1)
        if not np.isfinite(lp1):
            return -np.inf
        return h0 - (-lp1 + _kinetic(p1, inv_m))

    lr = log_ratio(eps)
    direction = 1.0 if lr > math.log(0.5) else -1.0
    for _ in range(60):
        if direction > 0 and not lr > math.log(0.5):
            break
        if direction < 0 and not lr < math.log(0.5):
            break
        eps = eps * 2.0 if direction > 0 else eps * 0.5
        lr = log_ratio(eps)
    if direction > 0:
        eps *= 0.5  # last doubling overshot
    return float(min(max(eps, 1e-8), 10.0))


def _initial_point(target, rng, radius):
    for _ in range(100):
        z = target.init_point(rng, radius) if radius is not None else target.init_point(rng)
        lp, g = target.logp_grad(z)
        if np.isfinite(lp):
            return z, lp, g
    raise SamplingError("could not find a finite initial point in 100 attempts")


def run_chain(target, cfg: HMCConfig, chain: int, init=None):
    """Run one chain; returns a dict of arrays (picklable).

    ``init`` is an optional unconstrained starting point; a random one is
    drawn when it is missing or has a non-finite log density.
    """
    rng = np.random.default_rng([int(cfg.seed), int(chain)])
    d = target.dim
    lp = -np.inf
    if init is not None:
        z = np.asarray(init, dtype=float).copy()
        if z.shape != (d,):
            raise InputError(f"init has shape {z.shape}, expected ({d},)")
        lp, g = target.logp_grad(z)
    if not np.isfinite(lp):
        z, lp, g = _initial_point(target, rng, cfg.init_radius)
    inv_m = np.ones(d)
    eps = _find_eps(target, rng, z, lp, g, inv_m)
    da = _DualAveraging(eps, cfg.target_accept)
    windows = _windows(cfg.warmup)
    window_ends = {end: start for start, end in windows}
    buf = []
    eps_trace = np.empty(cfg.warmup)
    n_warm_div = 0
    for it in range(cfg.warmup):
        z, lp, g, acc, div = _transition(target, rng, z, lp, g, eps, inv_m, cfg)
        n_warm_div += div
        eps = da.update(acc)
        eps_trace[it] = eps
        if windows and windows[0][0] <= it < windows[-1][1]:
            buf.append(z.copy())
        if (it + 1) in window_ends and len(buf) > 2:
            n = len(buf)
            var = np.var(np.asarray(buf), axis=0, ddof=1)
            inv_m = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
            buf = []
            eps = _find_eps(target, rng, z, lp, g, inv_m)
            da = _DualAveraging(eps, cfg.target_accept)
    if cfg.warmup:
        eps = da.final
    draws = np.empty((cfg.iters, d))
    lps = np.empty(cfg.iters)
    accs = np.empty(cfg.iters)
    divs = np.zeros(cfg.iters, dtype=bool)
    for it in range(cfg.iters):
        z, lp, g, acc, div = _transition(target, rng, z, lp, g, eps, inv_m, cfg)
        draws[it] = target.constrain(z)
        lps[it] = lp
        accs[it] = acc
        divs[it] = div
    return {
        "draws": draws,
        "logp": lps,
        "accept": accs,
        "divergent": divs,
        "step_size": eps,
        "eps_trace": eps_trace,
        "inv_mass": inv_m,
        "warmup_divergent": n_warm_div,
    }


def _run_chain_star(args):
    return run_chain(*args)


def hmc_sample(target, config: HMCConfig | None = None, strict: bool = True, inits=None) -> PosteriorDraws:
    """Sample ``target`` with adaptive HMC.

    Parameters
    ----------
    target
        Object with ``dim``, ``names``, ``logp_grad(z)``, ``constrain(z)`` and
        ``init_point(rng, radius)``.
    config : HMCConfig
    strict : bool
        Enforce the minimum warmup/iteration counts.
    inits : sequence of arrays, optional
        One unconstrained starting point per chain.

    Raises
    ------
    SamplingError
        When every chain diverges on every post-warmup iteration.
    """
    cfg = config or HMCConfig()
    cfg.check(strict)
    if inits is not None and len(inits) != cfg.chains:
        raise InputError(f"got {len(inits)} inits for {cfg.chains} chains")
    jobs = [(target, cfg, c, None if inits is None else inits[c]) for c in range(cfg.chains)]
    if cfg.threads > 1 and cfg.chains > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.threads, cfg.chains)) as ex:
            results = list(ex.map(_run_chain_star, jobs))
    else:
        results = [run_chain(*j) for j in jobs]
    divergent = np.stack([r["divergent"] for r in results])
    step = np.array([r["step_size"] for r in results])
    if cfg.iters and np.all(divergent.all(axis=1)):
        raise SamplingError(
            f"all {cfg.chains} chains diverged on every iteration; "
            f"last adapted step sizes {step.tolist()}"
        )
    return PosteriorDraws(
        names=list(target.names),
        draws=np.stack([r["draws"] for r in results]),
        accept_stat=np.stack([r["accept"] for r in results]),
        divergent=divergent,
        step_size=step,
        step_size_trace=np.stack([r["eps_trace"] for r in results]),
        logp=np.stack([r["logp"] for r in results]),
        inv_mass=np.stack([r["inv_mass"] for r in results]),
    )
