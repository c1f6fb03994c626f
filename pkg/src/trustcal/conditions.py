"""Generative model of AI trials under the four calibration conditions.

Each condition draws a latent score z from a class-conditional normal on the
log-odds scale (one mean per correctness class, shared sigma) and reports
confidence = logistic(z), rounded to the nearest 10% for display. The AI is
correct on a fixed fraction of trials, so confidence is the only usable cue.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .probability import logit, logistic, round_to_display

CONDITIONS = ("standard", "overconfidence", "underconfidence", "reverse")

_CONDITION_MEANS = {
    "standard": (1.0, -1.0),
    "overconfidence": (2.0, 0.0),
    "underconfidence": (0.0, -2.0),
    "reverse": (-1.0, 1.0),
}

DEFAULT_SIGMA = 0.5
DEFAULT_P_CORRECT = 0.5
DEFAULT_POOL_SIZE = 10_000


@dataclass(frozen=True)
class ConditionSpec:
    """Generative parameters of one AI calibration condition."""

    label: str
    mu_correct: float
    mu_wrong: float
    sigma: float = DEFAULT_SIGMA
    p_correct: float = DEFAULT_P_CORRECT

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0.0 < self.p_correct < 1.0:
            raise ValueError(f"p_correct must be in (0, 1), got {self.p_correct}")


@dataclass(frozen=True)
class TrialStimulus:
    """One AI trial: correctness plus raw and displayed confidence."""

    ai_correct: bool
    confidence_raw: float
    confidence_displayed: float


@dataclass
class StimulusPool:
    """Pre-generated stimuli for one condition; sessions sample from it with replacement."""

    condition: ConditionSpec
    items: list[TrialStimulus]
    seed: int = 0

    def __len__(self) -> int:
        return len(self.items)


def condition_spec(label: str) -> ConditionSpec:
    """Canonical spec for one of the four named conditions."""
    if label not in _CONDITION_MEANS:
        raise ValueError(f"unknown condition {label!r}; expected one of {CONDITIONS}")
    mu_c, mu_w = _CONDITION_MEANS[label]
    return ConditionSpec(label=label, mu_correct=mu_c, mu_wrong=mu_w)


def sample_trial_arrays(spec: ConditionSpec, n: int, rng: np.random.Generator):
    """Vectorized draw of n trials; returns (ai_correct, confidence_raw, confidence_displayed)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    g = rng.random(n) < spec.p_correct
    mu = np.where(g, spec.mu_correct, spec.mu_wrong)
    z = rng.normal(mu, spec.sigma)
    raw = logistic(z)
    return g, np.atleast_1d(raw), np.atleast_1d(round_to_display(raw))


def sample_trial(spec: ConditionSpec, rng: np.random.Generator) -> TrialStimulus:
    """Draw a single trial from the condition's generative model."""
    g, raw, disp = sample_trial_arrays(spec, 1, rng)
    return TrialStimulus(bool(g[0]), float(raw[0]), float(disp[0]))


def build_pool(spec: ConditionSpec, n: int = DEFAULT_POOL_SIZE, seed: int = 0) -> StimulusPool:
    """Pre-generate a pool of n i.i.d. trials; identical seed gives an identical pool."""
    if n < 1:
        raise ValueError("pool size must be >= 1")
    from .streams import substream

    rng = substream(seed, "pool", spec.label)
    g, raw, disp = sample_trial_arrays(spec, n, rng)
    items = [
        TrialStimulus(bool(g[i]), float(raw[i]), float(disp[i])) for i in range(n)
    ]
    return StimulusPool(condition=spec, items=items, seed=seed)


def write_pool(pool: StimulusPool, path) -> None:
    """Export a pool as CSV: index,ai_correct,confidence_raw,confidence_displayed."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "ai_correct", "confidence_raw", "confidence_displayed"])
        for i, item in enumerate(pool.items):
            writer.writerow(
                [i, int(item.ai_correct), f"{item.confidence_raw:.6f}", f"{item.confidence_displayed:.6f}"]
            )


def _display_bin_logprobs(spec: ConditionSpec):
    """Probability of each displayed value (0.0 .. 1.0) under both classes.

    Displayed value d covers raw confidence in [d - 0.05, d + 0.05), truncated
    to [0, 1]; on the latent scale that is an interval in z.
    """
    grid = np.arange(11) / 10.0
    lo = np.clip(grid - 0.05, 0.0, 1.0)
    hi = np.clip(grid + 0.05, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        z_lo = np.log(lo) - np.log1p(-lo)
        z_hi = np.log(hi) - np.log1p(-hi)
    p_c = norm.cdf(z_hi, spec.mu_correct, spec.sigma) - norm.cdf(z_lo, spec.mu_correct, spec.sigma)
    p_w = norm.cdf(z_hi, spec.mu_wrong, spec.sigma) - norm.cdf(z_lo, spec.mu_wrong, spec.sigma)
    return grid, p_c, p_w


def ideal_observer_accuracy(spec: ConditionSpec, n: int, rng: np.random.Generator) -> float:
    """Monte-Carlo accuracy of the likelihood-ratio-optimal observer.

    The observer sees only the displayed (rounded) confidence, knows the
    generative distributions, and judges "correct" whenever the posterior
    favors the correct class (ties break toward "correct").
    """
    if n < 1000:
        raise ValueError("need n >= 1000 draws for a stable estimate")
    grid, p_c, p_w = _display_bin_logprobs(spec)
    judge = spec.p_correct * p_c >= (1.0 - spec.p_correct) * p_w
    g, _, disp = sample_trial_arrays(spec, n, rng)
    idx = np.round(disp * 10.0).astype(int)
    return float(np.mean(judge[idx] == g))


def optimal_criterion(spec: ConditionSpec) -> float:
    """Confidence threshold maximizing expected judgment accuracy.

    The observer judges "correct" on the side of the correct-class mean. Found
    by grid search over thresholds in [0.01, 0.99] (step 0.001) against the
    analytic class densities.
    """
    if spec.mu_correct == spec.mu_wrong:
        raise ValueError("optimal criterion undefined when class means are equal")
    thresholds = np.round(np.arange(10, 991) / 1000.0, 3)
    z = logit(thresholds)
    above_c = 1.0 - norm.cdf(z, spec.mu_correct, spec.sigma)
    below_w = norm.cdf(z, spec.mu_wrong, spec.sigma)
    if spec.mu_correct > spec.mu_wrong:
        acc = spec.p_correct * above_c + (1.0 - spec.p_correct) * below_w
    else:
        acc = spec.p_correct * (1.0 - above_c) + (1.0 - spec.p_correct) * (1.0 - below_w)
    return float(thresholds[int(np.argmax(acc))])
