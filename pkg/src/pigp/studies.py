"""Study definitions: synthetic data blocks, default priors and model builders.

A study is described by plain dictionaries (normally read from a JSON
config). :func:`simulate` turns a simulator block into observations plus a
truth record, and :func:`build_model` turns the model section into a
:class:`~pigp.inference.PIModel`.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .errors import ConfigError
from .gp import ObservationSet, VariantKind
from .inference.priors import HalfNormal, Normal, Uniform, prior_from_dict
from .kernels import Family, KernelSpec
from .physics import heat_operator, wk2_operator
from .simulators import (
    BiasField,
    HeatField,
    InflowWaveform,
    add_noise,
    sample_heat,
    simulate_wk2,
    simulate_wk3,
    synchronize_cycles,
)

MODELS = ("wk2", "wk2_delta", "heat", "heat_bias")
KERNELS = {"se": Family.SE1D, "rq": Family.RQ1D, "per": Family.PERIODIC1D, "aniso_se": Family.ANISO_SE2D}


# -- simulation -------------------------------------------------------------
def _inflow(block) -> InflowWaveform:
    d = block.get("inflow", {})
    return InflowWaveform(
        q_max=float(d.get("q_max", 430.0)),
        t_sys=float(d.get("t_sys", 1.0 / 3.0)),
        period=float(d.get("period", 1.0)),
    )


def _wk_pressure(block, inflow, t):
    kw = dict(p0=float(block.get("p0", 80.0)), n_warm_cycles=int(block.get("n_warm_cycles", 10)))
    if block["kind"] == "wk2":
        return simulate_wk2(inflow, float(block["R"]), float(block["C"]), t, **kw)
    return simulate_wk3(inflow, float(block["R1"]), float(block["R2"]), float(block["C"]), t, **kw)


def _wk_grid(block, n_key, inflow):
    cycles = int(block.get("cycles", 3))
    n = int(block.get(n_key, cycles * int(block.get("points_per_cycle", 15))))
    if n < 1:
        raise ConfigError(f"{n_key} must be positive")
    return np.arange(n) * (cycles * inflow.period / n)


def simulate_wk(block, seed):
    """Windkessel data: pressure on u, inflow on f, optionally folded to one cycle."""
    inflow = _inflow(block)
    t_u = _wk_grid(block, "n_u", inflow)
    t_f = _wk_grid(block, "n_f", inflow)
    noise = block.get("noise", {})
    s_u, s_f = float(noise.get("sigma_u", 4.0)), float(noise.get("sigma_f", 10.0))
    y_u = add_noise(_wk_pressure(block, inflow, t_u), s_u, [int(seed), 1])
    q = inflow(t_f)
    y_f = add_noise(q, s_f, [int(seed), 2])
    groups_f = None
    if block.get("zero_noise_diastole", False):
        # diastolic inflow is known to be exactly zero
        dia = q == 0.0
        y_f = np.where(dia, 0.0, y_f)
        groups_f = np.where(dia, "zero", "0").astype(object)
    if block.get("synchronize", True):
        t_u, y_u = synchronize_cycles(t_u, y_u, inflow.period)
        t_f, y_f = synchronize_cycles(t_f, y_f, inflow.period)
    obs = ObservationSet(t_u, y_u, t_f, y_f, None, groups_f)
    truth = {k: block[k] for k in ("kind", "R", "C", "R1", "R2") if k in block}
    truth.update(sigma_u=s_u, sigma_f=s_f, inflow=inflow.__dict__.copy(),
                 p0=float(block.get("p0", 80.0)), n_warm_cycles=int(block.get("n_warm_cycles", 10)))
    if "R1" in block:
        truth["R_total"] = float(block["R1"]) + float(block["R2"])
    return obs, truth


def simulate_heat(block, seed):
    """Heat-equation data at random points of the unit square, optionally biased."""
    n_u, n_f = int(block.get("n_u", 35)), int(block.get("n_f", 20))
    clean = sample_heat(n_u, n_f, [int(seed), 0])
    noise = block.get("noise", {})
    s_u, s_f = float(noise.get("sigma_u", 0.2)), float(noise.get("sigma_f", 1.0))
    y_u = add_noise(clean.y_u, s_u, [int(seed), 1])
    if block.get("bias", False):
        y_u = y_u + BiasField()(clean.X_u[:, 0], clean.X_u[:, 1])
    y_f = add_noise(clean.y_f, s_f, [int(seed), 2])
    obs = ObservationSet(clean.X_u, y_u, clean.X_f, y_f, input_dim=2)
    truth = {"kind": "heat", "alpha": 1.0, "sigma_u": s_u, "sigma_f": s_f, "bias": bool(block.get("bias", False))}
    return obs, truth


def simulate(block, seed) -> tuple[ObservationSet, dict]:
    """Dispatch on ``block["kind"]`` (``wk2``, ``wk3`` or ``heat``)."""
    kind = block.get("kind")
    if kind in ("wk2", "wk3"):
        need = ("R", "C") if kind == "wk2" else ("R1", "R2", "C")
        missing = [k for k in need if k not in block]
        if missing:
            raise ConfigError(f"simulator block of kind {kind} needs {missing}")
        return simulate_wk(block, seed)
    if kind == "heat":
        return simulate_heat(block, seed)
    raise ConfigError(f"unknown simulator kind {kind!r}")


def truth_u(truth: dict, X) -> np.ndarray | None:
    """Noise-free u at inputs ``X`` (folded times for Windkessel data)."""
    if not truth:
        return None
    X = np.asarray(X, dtype=float)
    kind = truth.get("kind")
    if kind == "heat":
        return HeatField.u(X[:, 0], X[:, 1])
    if kind in ("wk2", "wk3"):
        inflow = InflowWaveform(**truth["inflow"])
        t = X[:, 0]
        order = np.argsort(t, kind="stable")
        ts = t[order]
        uniq, inv = np.unique(ts, return_inverse=True)
        block = dict(truth)
        vals = _wk_pressure(block, inflow, uniq)[inv]
        out = np.empty_like(t)
        out[order] = vals
        return out
    return None


# -- models ---------------------------------------------------------------------
def default_priors(model: str, kernel: str) -> dict:
    """Weakly informative priors used by the case studies."""
    if model in ("wk2", "wk2_delta"):
        ell = HalfNormal(1.0) if kernel == "per" else HalfNormal(1.0 / 3.0)
        pr = {
            "R": Uniform(0.5, 3.0),
            "C": Uniform(0.5, 3.0),
            "mu": Normal(100.0, 50.0),
            "sigma": HalfNormal(50.0),
            "ell": ell,
            "alpha_rq": Uniform(0.0, 10.0),
            "period": Uniform(0.8, 1.2),
            "sigma_u": HalfNormal(15.0),
            "sigma_f": HalfNormal(15.0),
            "delta.sigma": HalfNormal(50.0),
            "delta.ell": ell,
            "delta.period": Uniform(0.8, 1.2),
        }
        return pr
    if model in ("heat", "heat_bias"):
        return {
            "alpha": Uniform(0.0, 10.0),
            "mu": Normal(0.5, 1.0),
            "sigma": HalfNormal(1.0 / 3.0),
            "ell_t": HalfNormal(1.0),
            "ell_x": HalfNormal(1.0 / 3.0),
            "sigma_u": Uniform(0.0, 0.5),
            "sigma_f": Uniform(0.0, 3.0),
            "bias.sigma": HalfNormal(1.0 / 3.0),
            "bias.ell_t": HalfNormal(1.0),
            "bias.ell_x": HalfNormal(1.0 / 3.0),
        }
    raise ConfigError(f"unknown model {model!r}; choose from {MODELS}")


def _kernel_for(model: str, kernel: str | None) -> str:
    if kernel is None:
        return "aniso_se" if model.startswith("heat") else "se"
    if kernel not in KERNELS:
        raise ConfigError(f"unknown kernel {kernel!r}; choose from {sorted(KERNELS)}")
    wants_2d = model.startswith("heat")
    if wants_2d != (kernel == "aniso_se"):
        raise ConfigError(f"kernel {kernel!r} does not fit model {model!r}")
    return kernel


def build_model(section: dict, obs: ObservationSet):
    """A :class:`PIModel` from a config model section.

    Keys: ``name`` (wk2, wk2_delta, heat, heat_bias), ``kernel``, ``mean``
    (``"empirical"``, ``"free"`` or a number), ``priors`` (overrides as
    prior dicts), ``fixed`` (values) and ``tie_period``.
    """
    from .inference.model import PIModel

    name = section.get("name")
    if name not in MODELS:
        raise ConfigError(f"unknown model {name!r}; choose from {MODELS}")
    kernel = _kernel_for(name, section.get("kernel"))
    spec = KernelSpec(KERNELS[kernel])
    if name.startswith("wk2"):
        op = wk2_operator()
        variant = VariantKind.DISCREPANCY if name == "wk2_delta" else VariantKind.PLAIN
        # the discrepancy follows the base family, so a periodic base gets a periodic delta
        extra = KernelSpec(Family.PERIODIC1D if kernel == "per" else Family.SE1D) if name == "wk2_delta" else None
        mean_default = "empirical"
    else:
        op = heat_operator()
        variant = VariantKind.BIAS if name == "heat_bias" else VariantKind.PLAIN
        extra = KernelSpec(Family.ANISO_SE2D) if name == "heat_bias" else None
        mean_default = "free"
    mean = section.get("mean", mean_default)
    if mean == "empirical":
        mean = float(np.mean(obs.y_u)) if obs.n_u else 0.0
    priors = default_priors(name, kernel)
    for k, v in section.get("priors", {}).items():
        priors[k] = prior_from_dict(v)
    model = PIModel(
        kernel=spec, operator=op, priors=priors, variant=variant, extra_kernel=extra,
        tie_period=bool(section.get("tie_period", True)), mean=mean,
        fixed=section.get("fixed", {}),
        noise_groups_u=tuple(obs.groups("u")) or ("0",),
        noise_groups_f=tuple(obs.groups("f")) or ("0",),
    )
    unknown = set(section.get("priors", {})) - set(model.all_names)
    if unknown:
        raise ConfigError(f"priors given for unknown parameters {sorted(unknown)}")
    return replace(model, priors={k: v for k, v in priors.items() if k in model.all_names})
