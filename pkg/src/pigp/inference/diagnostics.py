"""Split, rank-normalized R-hat and bulk effective sample size."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata


def _rank_normalize(x: np.ndarray) -> np.ndarray:
    r = rankdata(x, method="average").reshape(x.shape)
    return ndtri((r - 0.375) / (x.size + 0.25))


def _split(x: np.ndarray) -> np.ndarray:
    """(chains, n) -> (2*chains, n//2), dropping the middle draw if n is odd."""
    n = x.shape[1] // 2
    return np.concatenate([x[:, :n], x[:, -n:]], axis=0)


def _rhat_raw(x: np.ndarray) -> float:
    m, n = x.shape
    means = x.mean(axis=1)
    W = x.var(axis=1, ddof=1).mean()
    B = n * means.var(ddof=1)
    if W == 0.0:
        return 1.0 if B == 0.0 else np.inf
    var_plus = (n - 1) / n * W + B / n
    return float(np.sqrt(var_plus / W))


def rhat(x) -> float:
    """Split R-hat on rank-normalized draws; ``x`` has shape (chains, n).

    Chains that are all the same constant give exactly 1.
    """
    x = np.asarray(x, dtype=float)
    s = _split(x)
    if np.all(s == s.flat[0]):
        return 1.0
    if np.all(s.var(axis=1) == 0.0):
        return np.inf  # constant within chains, different between them
    return _rhat_raw(_rank_normalize(s))


def _autocov(x: np.ndarray) -> np.ndarray:
    n = x.size
    x = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    ac = np.fft.irfft(f * np.conj(f), size)[:n]
    return ac / n


def ess(x) -> float:
    """Bulk ESS with Geyer's initial monotone sequence; ``x`` is (chains, n)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    s = _split(x) if x.shape[1] >= 4 else x
    if np.all(s == s.flat[0]):
        return float(s.size)
    z = _rank_normalize(s)
    m, n = z.shape
    acov = np.stack([_autocov(c) for c in z])
    chain_var = acov[:, 0] * n / (n - 1.0)
    W = chain_var.mean()
    var_plus = W * (n - 1.0) / n
    if m > 1:
        var_plus += z.mean(axis=1).var(ddof=1)
    rho = np.empty(n)
    rho[0] = 1.0
    rho[1:] = 1.0 - (W - acov[:, 1:].mean(axis=0)) / var_plus
    # initial positive sequence on pairs, then make it monotone
    t = 0
    pairs = []
    while t + 1 < n:
        p = rho[t] + rho[t + 1]
        if p < 0:
            break
        pairs.append(p)
        t += 2
    for i in range(1, len(pairs)):
        pairs[i] = min(pairs[i], pairs[i - 1])
    tau = -1.0 + 2.0 * sum(pairs) if pairs else 1.0
    tau = max(tau, 1.0 / np.log10(m * n)) if m * n > 1 else tau
    return float(m * n / tau)


def diagnostics(draws) -> dict:
    """R-hat (two or more chains) and ESS per parameter.

    Accepts a :class:`PosteriorDraws` or an array (chains, iters, params).
    """
    arr = draws.draws if hasattr(draws, "draws") else np.asarray(draws)
    names = list(draws.names) if hasattr(draws, "names") else [f"p{i}" for i in range(arr.shape[-1])]
    out = {"ess": {}, "rhat": {} if arr.shape[0] >= 2 else None}
    for i, n in enumerate(names):
        x = arr[:, :, i]
        out["ess"][n] = ess(x)
        if arr.shape[0] >= 2:
            out["rhat"][n] = rhat(x)
    return out
