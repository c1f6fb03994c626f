"""Cognitive model of trust recalibration.

A participant maps the AI's displayed confidence c to a perceived accuracy v
through a linear transform on the log-odds scale, with an intercept b
(baseline trust) and slope w (confidence sensitivity):

    log(v / (1 - v)) = b + w * log(c / (1 - c))

After feedback reveals whether the AI was correct (g in {0, 1}), both
parameters move along the prediction error delta = g - v, with separate
learning rates per parameter and per outcome:

    b <- b + alpha_b[g] * delta
    w <- w + alpha_w[g] * delta * log(c / (1 - c))

Confidence is clamped to [0.05, 0.95] before the log-odds so the recursion
stays finite at displayed values of 0% and 100%.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conditions import ConditionSpec, sample_trial_arrays
from .datastore import TrialRecord
from .probability import clamp_confidence, logistic, logit

WIN_PROBABILITY_MATCH = "probability_match"
WIN_THRESHOLD = "threshold"


@dataclass(frozen=True)
class AgentParams:
    """The six per-participant parameters: initial state plus four learning rates."""

    b0: float
    w0: float
    alpha_b_correct: float
    alpha_b_wrong: float
    alpha_w_correct: float
    alpha_w_wrong: float

    def __post_init__(self):
        if not (np.isfinite(self.b0) and np.isfinite(self.w0)):
            raise ValueError("b0 and w0 must be finite")
        for name in ("alpha_b_correct", "alpha_b_wrong", "alpha_w_correct", "alpha_w_wrong"):
            a = getattr(self, name)
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {a}")

    def alphas(self) -> np.ndarray:
        return np.array(
            [self.alpha_b_correct, self.alpha_b_wrong, self.alpha_w_correct, self.alpha_w_wrong]
        )


@dataclass(frozen=True)
class AgentState:
    """Evolving baseline trust and confidence sensitivity."""

    b: float
    w: float
    trial_index: int = 0


@dataclass(frozen=True)
class ResponsePolicy:
    """How a simulated participant converts perceived accuracy into a judgment."""

    kind: str = WIN_PROBABILITY_MATCH
    threshold: float = 0.5

    def __post_init__(self):
        if self.kind not in (WIN_PROBABILITY_MATCH, WIN_THRESHOLD):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")


# Default population for synthetic cohorts: initial bias and weight centered on
# positive baseline trust and positive confidence sensitivity, learning rates
# centered near 0.18 on the probability scale.
POPULATION_B0 = (0.60, 0.56)
POPULATION_W0 = (0.69, 1.8)
POPULATION_LOGIT_ALPHA = (-1.5, 1.0)


def sample_agent_params(rng: np.random.Generator) -> AgentParams:
    """Draw one agent from the default synthetic population."""
    la = rng.normal(POPULATION_LOGIT_ALPHA[0], POPULATION_LOGIT_ALPHA[1], size=4)
    a = logistic(la)
    return AgentParams(
        b0=float(rng.normal(*POPULATION_B0)),
        w0=float(rng.normal(*POPULATION_W0)),
        alpha_b_correct=float(a[0]),
        alpha_b_wrong=float(a[1]),
        alpha_w_correct=float(a[2]),
        alpha_w_wrong=float(a[3]),
    )


def initial_state(params: AgentParams) -> AgentState:
    return AgentState(b=params.b0, w=params.w0, trial_index=0)


def perceive(state: AgentState, c: float) -> float:
    """Perceived AI accuracy for displayed confidence c (clamped internally)."""
    return logistic(state.b + state.w * logit(clamp_confidence(c)))


def update(params: AgentParams, state: AgentState, c: float, g: bool) -> AgentState:
    """One error-driven update after observing the AI outcome g on confidence c."""
    L = logit(clamp_confidence(c))
    v = logistic(state.b + state.w * L)
    delta = (1.0 if g else 0.0) - v
    alpha_b = params.alpha_b_correct if g else params.alpha_b_wrong
    alpha_w = params.alpha_w_correct if g else params.alpha_w_wrong
    return AgentState(
        b=state.b + alpha_b * delta,
        w=state.w + alpha_w * delta * L,
        trial_index=state.trial_index + 1,
    )


def respond(v: float, policy: ResponsePolicy, rng: np.random.Generator) -> bool:
    """Judgment under the policy; threshold ties (v == threshold) resolve to "correct"."""
    if policy.kind == WIN_PROBABILITY_MATCH:
        return bool(rng.random() < v)
    return bool(v >= policy.threshold)


def simulate_participant(
    params: AgentParams,
    spec: ConditionSpec,
    n_trials: int = 50,
    policy: ResponsePolicy | None = None,
    rng: np.random.Generator | None = None,
    participant_id: str = "sim",
) -> list[TrialRecord]:
    """Simulate one participant; feedback reveals the true outcome on every trial.

    Each record carries the perceived accuracy v and the state (b, w) that
    produced it, i.e. the pre-update state of that trial.
    """
    if policy is None:
        policy = ResponsePolicy()
    if rng is None:
        rng = np.random.default_rng(0)
    state = initial_state(params)
    records: list[TrialRecord] = []
    for t in range(1, n_trials + 1):
        g_arr, _, disp = sample_trial_arrays(spec, 1, rng)
        g, c = bool(g_arr[0]), float(disp[0])
        v = perceive(state, c)
        judged = respond(v, policy, rng)
        records.append(
            TrialRecord(
                participant_id=participant_id,
                condition=spec.label,
                trial_index=t,
                ai_confidence=c,
                ai_correct=g,
                human_judged_correct=judged,
                human_correct=judged == g,
                v=v,
                b=state.b,
                w=state.w,
            )
        )
        state = update(params, state, c, g)
    return records


def trajectory(params: AgentParams, records: list[TrialRecord]) -> np.ndarray:
    """Replay the update recursion over recorded (c, g); returns (n+1, 2) array of (b, w).

    Row 0 is the initial state; row t the state after trial t.
    """
    for i, rec in enumerate(records, start=1):
        if rec.trial_index != i:
            raise ValueError(
                f"records out of order: trial_index {rec.trial_index} at position {i}"
            )
    out = np.empty((len(records) + 1, 2))
    state = initial_state(params)
    out[0] = (state.b, state.w)
    for t, rec in enumerate(records, start=1):
        state = update(params, state, rec.ai_confidence, rec.ai_correct)
        out[t] = (state.b, state.w)
    return out


@dataclass
class CohortResult:
    """Array view of a simulated cohort; all arrays are (n_agents, n_trials)."""

    condition: str
    confidence: np.ndarray
    ai_correct: np.ndarray
    judged: np.ndarray
    human_correct: np.ndarray
    v: np.ndarray
    b: np.ndarray  # state entering each trial
    w: np.ndarray
    b_final: np.ndarray  # state after the last trial, (n_agents,)
    w_final: np.ndarray

    @property
    def n_agents(self) -> int:
        return self.confidence.shape[0]

    @property
    def n_trials(self) -> int:
        return self.confidence.shape[1]


def _param_arrays(params, n_agents: int):
    if isinstance(params, AgentParams):
        params = [params] * n_agents
    if len(params) != n_agents:
        raise ValueError(f"expected {n_agents} parameter sets, got {len(params)}")
    b0 = np.array([p.b0 for p in params])
    w0 = np.array([p.w0 for p in params])
    al = np.array([p.alphas() for p in params])
    return b0, w0, al


def simulate_cohort(
    params,
    spec: ConditionSpec,
    n_agents: int,
    n_trials: int = 50,
    policy: ResponsePolicy | None = None,
    rng: np.random.Generator | None = None,
) -> CohortResult:
    """Vectorized simulation of independent agents under one condition.

    `params` is a single AgentParams shared by all agents or a sequence with
    one entry per agent. Matches simulate_participant's recursion exactly
    (same clamping, same pre-update state recorded per trial).
    """
    if policy is None:
        policy = ResponsePolicy()
    if rng is None:
        rng = np.random.default_rng(0)
    b0, w0, al = _param_arrays(params, n_agents)

    g = rng.random((n_agents, n_trials)) < spec.p_correct
    mu = np.where(g, spec.mu_correct, spec.mu_wrong)
    z = rng.normal(mu, spec.sigma)
    disp = np.round(logistic(z) * 10.0) / 10.0

    conf = np.empty((n_agents, n_trials))
    vs = np.empty((n_agents, n_trials))
    bs = np.empty((n_agents, n_trials))
    ws = np.empty((n_agents, n_trials))
    judged = np.empty((n_agents, n_trials), dtype=bool)

    b, w = b0.copy(), w0.copy()
    for t in range(n_trials):
        c = disp[:, t]
        L = logit(clamp_confidence(c))
        v = logistic(b + w * L)
        if policy.kind == WIN_PROBABILITY_MATCH:
            y = rng.random(n_agents) < v
        else:
            y = v >= policy.threshold
        conf[:, t], vs[:, t], bs[:, t], ws[:, t], judged[:, t] = c, v, b, w, y
        gt = g[:, t]
        delta = gt.astype(float) - v
        b = b + np.where(gt, al[:, 0], al[:, 1]) * delta
        w = w + np.where(gt, al[:, 2], al[:, 3]) * delta * L

    return CohortResult(
        condition=spec.label,
        confidence=conf,
        ai_correct=g,
        judged=judged,
        human_correct=judged == g,
        v=vs,
        b=bs,
        w=ws,
        b_final=b,
        w_final=w,
    )


def cohort_to_records(result: CohortResult, id_prefix: str = "sim") -> list[TrialRecord]:
    """Flatten a cohort into TrialRecords (ids <prefix>-0001, <prefix>-0002, ...)."""
    records: list[TrialRecord] = []
    for i in range(result.n_agents):
        pid = f"{id_prefix}-{i + 1:04d}"
        for t in range(result.n_trials):
            judged = bool(result.judged[i, t])
            g = bool(result.ai_correct[i, t])
            records.append(
                TrialRecord(
                    participant_id=pid,
                    condition=result.condition,
                    trial_index=t + 1,
                    ai_confidence=float(result.confidence[i, t]),
                    ai_correct=g,
                    human_judged_correct=judged,
                    human_correct=judged == g,
                    v=float(result.v[i, t]),
                    b=float(result.b[i, t]),
                    w=float(result.w[i, t]),
                )
            )
    return records
