import numpy as np
import pytest

from pigp.kernels import Family, HyperParams, KernelSpec


def random_hp(spec: KernelSpec, rng, ell_range=(0.3, 2.0)) -> HyperParams:
    ells = tuple(rng.uniform(*ell_range, spec.input_dim))
    return HyperParams(
        sigma=float(rng.uniform(0.5, 2.0)),
        lengthscales=ells,
        alpha_rq=float(rng.uniform(0.5, 5.0)) if spec.family is Family.RQ1D else None,
        period=float(rng.uniform(0.7, 1.5)) if spec.family is Family.PERIODIC1D else None,
    )


def rel_close(a, b, rtol, atol):
    """Elementwise: |a - b| < atol or |a - b| < rtol * |b|."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    err = np.abs(a - b)
    return (err < atol) | (err < rtol * np.abs(b))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ALL_FAMILIES = [Family.SE1D, Family.RQ1D, Family.PERIODIC1D, Family.ANISO_SE2D]


def pytest_configure(config):
    config.acceptance = {}


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "acceptance", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        status, detail = results[k]
        terminalreporter.write_line(f"CRITERION {k} {status}: {detail}")
