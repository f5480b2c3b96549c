"""Compiled vs pure-Python kernel tables.

Times the radial derivative tables directly and a full physics-informed
log-likelihood with gradient, once per backend, and checks that both
backends agree. Run with ``python benchmarks/bench_kernels.py``.
"""

import argparse
import timeit

import numpy as np

from pigp import _backend
from pigp.gp import ObservationSet
from pigp.inference import exact_loglik
from pigp.studies import build_model, simulate


def _best(fn, number, repeat=5):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def table_cases(n):
    r = np.random.default_rng(0).uniform(0.0, 3.0, n)
    return {
        "se(nmax=4)": lambda: _backend.se_table(r, 0.7, 4, True),
        "rq": lambda: _backend.rq_table(r, 0.7, 2.5, True),
        "per": lambda: _backend.per_table(r, 0.7, 1.1, True),
    }


def likelihood_case():
    obs, _ = simulate({"kind": "wk2", "R": 1.0, "C": 1.1, "synchronize": False}, 0)
    model = build_model({"name": "wk2", "kernel": "se"}, obs)
    vals = {"R": 1.0, "C": 1.1, "sigma": 20.0, "ell": 0.1, "sigma_u": 4.0, "sigma_f": 10.0}
    return lambda: exact_loglik(model, obs, vals, grad=True)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    args = ap.parse_args(argv)
    backends = _backend.available()
    if "cython" not in backends:
        print("compiled extension not built; only the Python backend is available")
    results = {}
    outputs = {}
    for name in backends:
        _backend.set_backend(name)
        for n in args.sizes:
            for case, fn in table_cases(n).items():
                results[(case, n, name)] = _best(fn, number=max(1, 200_000 // n))
                outputs[(case, n, name)] = fn()[0]
        fn = likelihood_case()
        results[("loglik+grad N=90", 0, name)] = _best(fn, number=20)
        outputs[("loglik+grad N=90", 0, name)] = np.atleast_1d(fn()[0])

    print(f"{'case':<20}{'n':>9}" + "".join(f"{b + ' [ms]':>15}" for b in backends) + f"{'speedup':>10}{'max |diff|':>13}")
    keys = sorted({(c, n) for c, n, _ in results}, key=lambda k: (k[0], k[1]))
    for case, n in keys:
        times = [results[(case, n, b)] * 1e3 for b in backends]
        line = f"{case:<20}{n or '':>9}" + "".join(f"{t:>15.4f}" for t in times)
        if len(backends) == 2:
            diff = np.max(np.abs(outputs[(case, n, "python")] - outputs[(case, n, "cython")]))
            line += f"{times[0] / times[1]:>10.2f}{diff:>13.2e}"
        print(line)
    _backend.set_backend(backends[-1])


if __name__ == "__main__":
    main()
