"""Posterior credible bands for the evolving (b_t, w_t) state."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..datastore import group_by_participant
from ..probability import clamp_confidence, logit
from .model import RATE_FAMILIES
from .samplers import PosteriorDraws


def _replay_matrix(b0, w0, alphas, c, g):
    """Replay the update recursion for a vector of posterior draws.

    b0/w0: (n_draws,); alphas: (n_draws, 4); c/g: the participant's trial
    sequence. Returns (n_trials + 1, n_draws) arrays for b and w.
    """
    n_draws = b0.shape[0]
    n_trials = len(c)
    bs = np.empty((n_trials + 1, n_draws))
    ws = np.empty((n_trials + 1, n_draws))
    b = b0.copy()
    w = w0.copy()
    bs[0], ws[0] = b, w
    for t in range(n_trials):
        L = logit(clamp_confidence(c[t]))
        v = expit(b + w * L)
        delta = (1.0 if g[t] else 0.0) - v
        a_b = alphas[:, 0] if g[t] else alphas[:, 1]
        a_w = alphas[:, 2] if g[t] else alphas[:, 3]
        b = b + a_b * delta
        w = w + a_w * delta * L
        bs[t + 1], ws[t + 1] = b, w
    return bs, ws


def posterior_trajectories(draws: PosteriorDraws, data) -> dict:
    """Per-condition posterior mean and central 95% band of (b_t, w_t).

    Replays every posterior draw over every participant's recorded trials and
    pools draws x participants within each condition. Requires participant
    columns in `draws` for every participant in `data`.
    """
    groups = data if isinstance(data, dict) else group_by_participant(list(data))
    per_condition: dict[str, dict[str, list]] = {}
    for pid, records in groups.items():
        records = sorted(records, key=lambda r: r.trial_index)
        cond = records[0].condition
        try:
            b0 = draws.flat(f"b0[{pid}]")
            w0 = draws.flat(f"w0[{pid}]")
            alphas = np.column_stack(
                [expit(draws.flat(f"logit_alpha_{fam}[{pid}]")) for fam in RATE_FAMILIES]
            )
        except KeyError as exc:
            raise ValueError(
                f"posterior draws carry no parameters for participant {pid!r}"
            ) from exc
        c = [r.ai_confidence for r in records]
        g = [r.ai_correct for r in records]
        bs, ws = _replay_matrix(b0, w0, alphas, c, g)
        bucket = per_condition.setdefault(cond, {"b": [], "w": []})
        bucket["b"].append(bs)
        bucket["w"].append(ws)

    out = {}
    for cond, bucket in per_condition.items():
        lengths = {arr.shape[0] for arr in bucket["b"]}
        if len(lengths) != 1:
            raise ValueError(f"participants in {cond!r} have unequal trial counts")
        b_all = np.concatenate(bucket["b"], axis=1)
        w_all = np.concatenate(bucket["w"], axis=1)
        out[cond] = {
            "trial": np.arange(b_all.shape[0]),
            "b_mean": b_all.mean(axis=1),
            "b_lo": np.percentile(b_all, 2.5, axis=1),
            "b_hi": np.percentile(b_all, 97.5, axis=1),
            "w_mean": w_all.mean(axis=1),
            "w_lo": np.percentile(w_all, 2.5, axis=1),
            "w_hi": np.percentile(w_all, 97.5, axis=1),
        }
    return out
