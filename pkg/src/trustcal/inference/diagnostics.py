"""Split-chain R-hat and autocorrelation-based effective sample size."""

from __future__ import annotations

import numpy as np


def _split_chains(x: np.ndarray) -> np.ndarray:
    """Halve each chain; drops the last iteration when the length is odd."""
    x = np.asarray(x, dtype=float)
    m, n = x.shape
    half = n // 2
    return np.vstack([x[:, :half], x[:, half : 2 * half]])


def rhat(x: np.ndarray) -> float:
    """Potential scale reduction over split chains.

    With W the mean within-chain variance and B the between-chain variance of
    the split-chain means (times n), returns sqrt((W(n-1)/n + B/n) / W).
    Returns 1.0 when every chain is constant at the same value, +inf when
    constant chains disagree.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need draws shaped (n_chains >= 2, n_iterations)")
    if x.shape[1] < 4:
        raise ValueError("need at least 4 iterations per chain")
    if np.all(x == x[:, :1]):  # every chain constant
        return 1.0 if np.all(x == x.flat[0]) else float("inf")
    s = _split_chains(x)
    n = s.shape[1]
    means = s.mean(axis=1)
    w = float(np.mean(s.var(axis=1, ddof=1)))
    b = float(n * np.var(means, ddof=1))
    if w == 0.0:
        return 1.0 if b == 0.0 else float("inf")
    var_plus = w * (n - 1) / n + b / n
    return float(np.sqrt(var_plus / w))


def _autocorrelations(chain: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased-normalization autocovariance via FFT, scaled to rho(0) = 1."""
    n = chain.size
    centered = chain - chain.mean()
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(centered, size)
    acov = np.fft.irfft(f * np.conjugate(f), size)[: max_lag + 1].real / n
    if acov[0] <= 0:
        return np.zeros(max_lag + 1)
    return acov / acov[0]


def ess(x: np.ndarray) -> float:
    """Effective sample size combined across chains.

    Per-lag correlations are pooled using the within/between chain variance
    decomposition, then summed in consecutive (even, odd) lag pairs and
    truncated at the first pair with a negative sum, with the running pair
    sums forced non-increasing (initial-monotone estimator). Chains with zero
    variance return the nominal draw count by convention.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need draws shaped (n_chains >= 2, n_iterations)")
    m, n = x.shape
    total = m * n
    if np.all(x == x[:, :1]):  # every chain constant
        return float(total)
    chain_vars = x.var(axis=1, ddof=1)
    w = float(np.mean(chain_vars))
    if w == 0.0:
        return float(total)
    b_over_n = float(np.var(x.mean(axis=1), ddof=1)) if m > 1 else 0.0
    var_plus = w * (n - 1) / n + b_over_n

    max_lag = n - 1
    acs = np.array([_autocorrelations(x[i], max_lag) for i in range(m)])
    # rho_t pooled across chains (Stan-style): correlation that remains after
    # removing the part explained by between-chain disagreement
    mean_autocov = np.mean(chain_vars[:, None] * acs, axis=0)
    rho = 1.0 - (w - mean_autocov) / var_plus

    tau = 0.0
    prev_pair = np.inf
    k = 0
    while 2 * k + 1 <= max_lag:
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair < 0.0:
            break
        pair = min(pair, prev_pair)
        tau += pair
        prev_pair = pair
        k += 1
    tau = max(2.0 * tau - 1.0, 1e-12)
    return float(min(total / tau, float(total)))
