"""Model densities: likelihood, participant-level priors, and hyper priors.

The hierarchy: experiment-wide normal priors on the initial bias b0 and weight
w0; per-condition normal priors on the log-odds of each of the four learning
rates. Hyper means for b0/w0 get standard-normal priors, learning-rate hyper
means get N(-1.5, 1.5) (centering the rates near 0.18), and every hyper scale
gets an Exponential(1) prior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..agent import AgentParams, AgentState, initial_state, perceive, update
from ..conditions import CONDITIONS
from ..datastore import TrialRecord
from ..probability import logit

RATE_FAMILIES = ("b_correct", "b_wrong", "w_correct", "w_wrong")

LOG_2PI = math.log(2.0 * math.pi)

ALPHA_HYPER_MEAN_LOC = -1.5
ALPHA_HYPER_MEAN_SCALE = 1.5


def _normal_logpdf(x: float, mu: float, sd: float) -> float:
    z = (x - mu) / sd
    return -0.5 * z * z - math.log(sd) - 0.5 * LOG_2PI


@dataclass
class HyperParams:
    """Group-level means and scales: experiment-wide for b0/w0, per-condition for rates."""

    mu_b0: float = 0.0
    sigma_b0: float = 1.0
    mu_w0: float = 0.0
    sigma_w0: float = 1.0
    mu_alpha: dict = field(default_factory=dict)  # {(condition, family): mean of logit(alpha)}
    sigma_alpha: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("sigma_b0", "sigma_w0"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        for key, sd in self.sigma_alpha.items():
            if sd <= 0:
                raise ValueError(f"sigma_alpha[{key}] must be > 0")

    @classmethod
    def prior_means(cls, conditions=CONDITIONS) -> "HyperParams":
        """Hypers fixed at the means of their priors (used by the MAP fast path)."""
        mu = {(c, f): ALPHA_HYPER_MEAN_LOC for c in conditions for f in RATE_FAMILIES}
        sd = {(c, f): 1.0 for c in conditions for f in RATE_FAMILIES}
        return cls(mu_b0=0.0, sigma_b0=1.0, mu_w0=0.0, sigma_w0=1.0, mu_alpha=mu, sigma_alpha=sd)

    def conditions(self):
        return sorted({c for c, _ in self.mu_alpha})

    def alpha_prior(self, condition: str, family: str):
        try:
            return self.mu_alpha[(condition, family)], self.sigma_alpha[(condition, family)]
        except KeyError:
            raise ValueError(f"no learning-rate hypers for condition {condition!r}")


def draw_participant_params(
    rng, hyper: HyperParams | None = None, condition: str = "standard"
) -> AgentParams:
    """One draw from the participant-level prior (hypers fixed at their means
    by default). This is the self-consistent generator for recovery studies."""
    hyper = hyper if hyper is not None else HyperParams.prior_means()
    la = np.array([rng.normal(*hyper.alpha_prior(condition, fam)) for fam in RATE_FAMILIES])
    a = expit(la)
    return AgentParams(
        b0=float(rng.normal(hyper.mu_b0, hyper.sigma_b0)),
        w0=float(rng.normal(hyper.mu_w0, hyper.sigma_w0)),
        alpha_b_correct=float(a[0]),
        alpha_b_wrong=float(a[1]),
        alpha_w_correct=float(a[2]),
        alpha_w_wrong=float(a[3]),
    )


def log_likelihood(params: AgentParams, records: list[TrialRecord]) -> float:
    """Sum of Bernoulli log-probabilities of the judgments under the perception recursion.

    Perceived accuracy is clamped to [1e-9, 1 - 1e-9] inside the log, so the
    value is finite for any finite parameters. Empty data gives 0.0.
    """
    if not records:
        return 0.0
    ordered = sorted(records, key=lambda r: r.trial_index)
    state: AgentState = initial_state(params)
    ll = 0.0
    for rec in ordered:
        v = perceive(state, rec.ai_confidence)
        vc = min(max(v, 1e-9), 1.0 - 1e-9)
        ll += math.log(vc) if rec.human_judged_correct else math.log(1.0 - vc)
        state = update(params, state, rec.ai_confidence, rec.ai_correct)
    return ll


def log_prior_participant(params: AgentParams, hyper: HyperParams, condition: str) -> float:
    """Normal log-densities of (b0, w0) and of each logit learning rate.

    Evaluated on the sampling parameterization: rates contribute through their
    log-odds, with no extra change-of-variables term.
    """
    lp = _normal_logpdf(params.b0, hyper.mu_b0, hyper.sigma_b0)
    lp += _normal_logpdf(params.w0, hyper.mu_w0, hyper.sigma_w0)
    rates = dict(
        b_correct=params.alpha_b_correct,
        b_wrong=params.alpha_b_wrong,
        w_correct=params.alpha_w_correct,
        w_wrong=params.alpha_w_wrong,
    )
    for family, alpha in rates.items():
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha_{family} must be inside (0, 1) to have prior mass")
        mu, sd = hyper.alpha_prior(condition, family)
        lp += _normal_logpdf(logit(alpha), mu, sd)
    return lp


def log_prior_hyper(hyper: HyperParams) -> float:
    """Hyper prior: N(0,1) on mu_b0/mu_w0, N(-1.5, 1.5) on each rate hyper mean,
    Exponential(1) on every scale."""
    for name in ("sigma_b0", "sigma_w0"):
        if getattr(hyper, name) <= 0:
            raise ValueError(f"{name} must be > 0")
    lp = _normal_logpdf(hyper.mu_b0, 0.0, 1.0) + _normal_logpdf(hyper.mu_w0, 0.0, 1.0)
    lp += -hyper.sigma_b0 - hyper.sigma_w0
    for key, mu in hyper.mu_alpha.items():
        lp += _normal_logpdf(mu, ALPHA_HYPER_MEAN_LOC, ALPHA_HYPER_MEAN_SCALE)
        sd = hyper.sigma_alpha[key]
        if sd <= 0:
            raise ValueError(f"sigma_alpha[{key}] must be > 0")
        lp += -sd
    return lp


def log_posterior(
    participants: dict[str, AgentParams],
    hyper: HyperParams,
    data: dict[str, list[TrialRecord]],
) -> float:
    """Joint log-density: likelihoods + participant priors + hyper prior."""
    lp = log_prior_hyper(hyper)
    for pid, params in participants.items():
        if pid not in data:
            raise ValueError(f"no trial data for participant {pid!r}")
        records = data[pid]
        conditions = {r.condition for r in records}
        if len(conditions) != 1:
            raise ValueError(f"participant {pid!r} has mixed conditions {conditions}")
        lp += log_likelihood(params, records)
        lp += log_prior_participant(params, hyper, conditions.pop())
    return lp
