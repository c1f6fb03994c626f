"""Behavioral and model-fit statistics for judged-trial data.

Hits and false alarms are defined on the participant's judgment: a hit is
judging "correct" when the AI was correct, a false alarm is judging "correct"
when it was wrong.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtri

from .datastore import TrialRecord, group_by_participant

SLOPE_CAP = 5.0


@dataclass
class BlockSummary:
    block_start: int
    block_end: int
    accuracy: float
    hit_rate: float | None
    false_alarm_rate: float | None
    d_prime: float | None
    n_trials: int


@dataclass
class CalibrationBin:
    bin_center: float
    n: int
    ai_accuracy: float | None
    perceived_accuracy: float | None


@dataclass
class CalibrationReport:
    bins: list[CalibrationBin]
    ece: float


@dataclass
class SlopeFit:
    beta: float
    intercept: float
    se: float
    separated: bool
    n_iterations: int


def _arrays(records: list[TrialRecord]):
    g = np.array([r.ai_correct for r in records], dtype=bool)
    y = np.array([r.human_judged_correct for r in records], dtype=bool)
    correct = np.array([r.human_correct for r in records], dtype=bool)
    conf = np.array([r.ai_confidence for r in records], dtype=float)
    t = np.array([r.trial_index for r in records], dtype=float)
    return g, y, correct, conf, t


def hr_far(records: list[TrialRecord], trial_range: tuple[int, int]):
    """(hit rate, false alarm rate) over trial indices in [lo, hi].

    A rate whose class has no trials in the range is returned as None.
    """
    lo, hi = trial_range
    sel = [r for r in records if lo <= r.trial_index <= hi]
    hits = sum(1 for r in sel if r.ai_correct and r.human_judged_correct)
    n_signal = sum(1 for r in sel if r.ai_correct)
    fas = sum(1 for r in sel if not r.ai_correct and r.human_judged_correct)
    n_noise = sum(1 for r in sel if not r.ai_correct)
    hr = hits / n_signal if n_signal else None
    far = fas / n_noise if n_noise else None
    return hr, far


def dprime(hits: int, n_signal: int, false_alarms: int, n_noise: int, correction: bool = True) -> float:
    """Sensitivity d' = z(HR) - z(FAR).

    With the log-linear correction HR* = (hits + 0.5) / (n_signal + 1) (and
    likewise for FAR) the rates never touch 0 or 1.
    """
    if n_signal < 1 or n_noise < 1:
        raise ValueError("need at least one signal and one noise trial")
    if min(hits, false_alarms) < 0 or hits > n_signal or false_alarms > n_noise:
        raise ValueError("counts out of range")
    if correction:
        hr = (hits + 0.5) / (n_signal + 1)
        far = (false_alarms + 0.5) / (n_noise + 1)
    else:
        hr = hits / n_signal
        far = false_alarms / n_noise
    return float(ndtri(hr) - ndtri(far))


def block_accuracy(records: list[TrialRecord], block_size: int = 10) -> list[BlockSummary]:
    """Per-block summaries over consecutive trial-index blocks, pooled across participants.

    The last block keeps its true (possibly partial) size.
    """
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    if not records:
        raise ValueError("no records")
    max_t = max(r.trial_index for r in records)
    out: list[BlockSummary] = []
    for start in range(1, max_t + 1, block_size):
        end = min(start + block_size - 1, max_t)
        sel = [r for r in records if start <= r.trial_index <= end]
        if not sel:
            continue
        correct = np.array([r.human_correct for r in sel], dtype=bool)
        hr, far = hr_far(sel, (start, end))
        n_signal = sum(1 for r in sel if r.ai_correct)
        n_noise = len(sel) - n_signal
        d = None
        if n_signal and n_noise:
            hits = sum(1 for r in sel if r.ai_correct and r.human_judged_correct)
            fas = sum(1 for r in sel if not r.ai_correct and r.human_judged_correct)
            d = dprime(hits, n_signal, fas, n_noise)
        out.append(
            BlockSummary(
                block_start=start,
                block_end=end,
                accuracy=float(np.mean(correct)),
                hit_rate=hr,
                false_alarm_rate=far,
                d_prime=d,
                n_trials=len(sel),
            )
        )
    return out


def _ece_from_arrays(conf: np.ndarray, g: np.ndarray, y: np.ndarray):
    """ECE over the 11-point displayed-confidence grid; empty bins drop out."""
    idx = np.round(np.asarray(conf) * 10.0).astype(int)
    g = np.asarray(g, dtype=float)
    y = np.asarray(y, dtype=float)
    n = idx.size
    bins: list[CalibrationBin] = []
    ece = 0.0
    for m in range(11):
        mask = idx == m
        count = int(mask.sum())
        if count:
            acc_ai = float(g[mask].mean())
            acc_h = float(y[mask].mean())
            ece += (count / n) * abs(acc_ai - acc_h)
            bins.append(CalibrationBin(m / 10.0, count, acc_ai, acc_h))
        else:
            bins.append(CalibrationBin(m / 10.0, 0, None, None))
    return bins, float(ece)


def ece(records: list[TrialRecord]) -> CalibrationReport:
    """Expected calibration error between AI accuracy and perceived accuracy.

    Trials are binned by displayed confidence; per bin the AI's actual
    accuracy is compared with the fraction of trials judged "correct", and the
    gaps are combined weighted by bin occupancy.
    """
    if not records:
        raise ValueError("no records")
    g, y, _, conf, _ = _arrays(records)
    bins, value = _ece_from_arrays(conf, g, y)
    return CalibrationReport(bins=bins, ece=value)


def learning_slope(records: list[TrialRecord], max_iter: int = 50, tol: float = 1e-8) -> SlopeFit:
    """Logistic-regression slope of correctness on trial index, fit by IRLS.

    Perfect separation is reported with the slope capped at +/-5 and the
    `separated` flag set.
    """
    if len(records) < 20:
        raise ValueError("need >= 20 trials to estimate a slope")
    _, _, correct, _, t = _arrays(records)
    y = correct.astype(float)
    X = np.column_stack([np.ones_like(t), t])
    beta = np.zeros(2)
    separated = False
    n_it = 0
    for n_it in range(1, max_iter + 1):
        eta = X @ beta
        p = expit(eta)
        wgt = np.maximum(p * (1.0 - p), 1e-10)
        try:
            step = np.linalg.solve((X * wgt[:, None]).T @ X, X.T @ (y - p))
        except np.linalg.LinAlgError:
            separated = True
            break
        beta = beta + step
        if abs(beta[1]) > SLOPE_CAP:
            separated = True
            beta[1] = math.copysign(SLOPE_CAP, beta[1])
            break
        if np.max(np.abs(step)) < tol:
            break
    p = expit(X @ beta)
    wgt = np.maximum(p * (1.0 - p), 1e-10)
    try:
        cov = np.linalg.inv((X * wgt[:, None]).T @ X)
        se = float(np.sqrt(max(cov[1, 1], 0.0)))
    except np.linalg.LinAlgError:
        se = float("inf")
    return SlopeFit(
        beta=float(beta[1]), intercept=float(beta[0]), se=se, separated=separated, n_iterations=n_it
    )


def cohort_learning_slope(records: list[TrialRecord]) -> float:
    """Inverse-variance-weighted mean of per-participant learning slopes."""
    groups = group_by_participant(records)
    betas, weights = [], []
    for recs in groups.values():
        fit = learning_slope(recs)
        if not np.isfinite(fit.se) or fit.se <= 0:
            continue
        betas.append(fit.beta)
        weights.append(1.0 / fit.se**2)
    if not betas:
        raise ValueError("no usable participant slopes")
    return float(np.average(betas, weights=weights))


def classify_learner(records: list[TrialRecord]) -> str:
    """"learner" when accuracy on trials 31-50 strictly exceeds 0.60."""
    late = [r for r in records if 31 <= r.trial_index <= 50]
    if len(late) < 20:
        raise ValueError(f"need the 20 trials 31..50, found {len(late)}")
    acc = np.mean([r.human_correct for r in late])
    return "learner" if acc > 0.60 else "non_learner"


def model_fit_stats(v: np.ndarray, records: list[TrialRecord]) -> dict:
    """Trial agreement, mean per-trial log-likelihood, and McFadden pseudo-R^2.

    Agreement counts v == 0.5 as predicting "correct", mirroring the
    threshold-policy tie-break. The null model predicts the cohort base rate.
    """
    v = np.asarray(v, dtype=float)
    if v.shape[0] != len(records):
        raise ValueError("need exactly one prediction per record")
    _, y, _, _, _ = _arrays(records)
    y = y.astype(float)
    agreement = float(np.mean((v >= 0.5) == (y == 1.0)))
    vc = np.clip(v, 1e-9, 1.0 - 1e-9)
    ll = float(np.sum(y * np.log(vc) + (1.0 - y) * np.log(1.0 - vc)))
    base = float(np.clip(np.mean(y), 1e-9, 1.0 - 1e-9))
    ll_null = float(np.sum(y * np.log(base) + (1.0 - y) * np.log(1.0 - base)))
    r2 = 1.0 - ll / ll_null if ll_null != 0.0 else 1.0
    return {
        "agreement": agreement,
        "mean_loglik_per_trial": ll / len(records),
        "mcfadden_r2": float(r2),
    }
