"""Numba-compiled hot paths for fitting.

These mirror the reference recursion in trustcal.agent exactly (same clamping
and update order); the test suite pins the two implementations against each
other.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

LOG_2PI = math.log(2.0 * math.pi)


@njit(cache=True)
def loglik_core(b0, w0, ab1, ab0, aw1, aw0, c, g, y):
    """Bernoulli log-likelihood of judgments y under the perception recursion."""
    b = b0
    w = w0
    ll = 0.0
    for t in range(c.shape[0]):
        cc = min(max(c[t], 0.05), 0.95)
        L = math.log(cc / (1.0 - cc))
        v = 1.0 / (1.0 + math.exp(-(b + w * L)))
        vc = min(max(v, 1e-9), 1.0 - 1e-9)
        if y[t]:
            ll += math.log(vc)
        else:
            ll += math.log(1.0 - vc)
        delta = (1.0 if g[t] else 0.0) - v
        if g[t]:
            b = b + ab1 * delta
            w = w + aw1 * delta * L
        else:
            b = b + ab0 * delta
            w = w + aw0 * delta * L
    return ll


@njit(cache=True)
def neg_log_posterior_unconstrained(x, c, g, y, prior_mu, prior_sd):
    """-(loglik + participant prior) at x = (b0, w0, logit alphas x4).

    prior_mu / prior_sd hold the six normal prior parameters in the same
    order; learning-rate priors apply on the log-odds scale.
    """
    nlp = 0.0
    for k in range(6):
        zk = (x[k] - prior_mu[k]) / prior_sd[k]
        nlp += 0.5 * zk * zk + math.log(prior_sd[k]) + 0.5 * LOG_2PI
    ab1 = 1.0 / (1.0 + math.exp(-x[2]))
    ab0 = 1.0 / (1.0 + math.exp(-x[3]))
    aw1 = 1.0 / (1.0 + math.exp(-x[4]))
    aw0 = 1.0 / (1.0 + math.exp(-x[5]))
    nlp -= loglik_core(x[0], x[1], ab1, ab0, aw1, aw0, c, g, y)
    return nlp


def records_to_arrays(records):
    """(confidence, ai_correct, judged) arrays ordered by trial, ready for the kernels."""
    ordered = sorted(records, key=lambda r: r.trial_index)
    c = np.array([r.ai_confidence for r in ordered], dtype=np.float64)
    g = np.array([r.ai_correct for r in ordered], dtype=np.bool_)
    y = np.array([r.human_judged_correct for r in ordered], dtype=np.bool_)
    return c, g, y
