"""Fast per-participant MAP fitting with the group-level hypers held fixed.

This is the cheap companion to the full hierarchical sampler: it maximizes
log-likelihood + participant prior on the unconstrained scale (learning rates
through their log-odds) with a restarted Nelder-Mead simplex search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..agent import AgentParams, initial_state, perceive, update
from ..datastore import TrialRecord
from ..probability import logistic
from ..streams import substream
from ._kernels import neg_log_posterior_unconstrained, records_to_arrays
from .model import RATE_FAMILIES, HyperParams


@dataclass
class FitResult:
    params: AgentParams
    log_posterior_at_mode: float
    converged: bool
    n_evaluations: int


def _params_from_x(x: np.ndarray) -> AgentParams:
    a = logistic(x[2:6])
    return AgentParams(
        b0=float(x[0]),
        w0=float(x[1]),
        alpha_b_correct=float(a[0]),
        alpha_b_wrong=float(a[1]),
        alpha_w_correct=float(a[2]),
        alpha_w_wrong=float(a[3]),
    )


class MapEstimator(BaseEstimator):
    """Posterior-mode estimator for one participant's six parameters.

    Parameters
    ----------
    hyper : HyperParams or None
        Group-level prior parameters; defaults to the hyper-prior means.
    condition : str or None
        Which condition's learning-rate prior to use; inferred from the
        records when None.
    n_restarts : int
        Independent simplex searches started from prior draws.
    max_evals : int
        Evaluation budget per restart; a restart that exhausts it without
        shrinking its simplex below `xatol` counts as not converged.
    xatol : float
        Simplex diameter (max vertex distance to the best vertex) below which
        a restart is converged.
    seed : int
        Seeds the restart draws; fits are deterministic given (data, seed).
    """

    def __init__(self, hyper=None, condition=None, n_restarts=20, max_evals=10_000,
                 xatol=1e-6, seed=0):
        self.hyper = hyper
        self.condition = condition
        self.n_restarts = n_restarts
        self.max_evals = max_evals
        self.xatol = xatol
        self.seed = seed

    def fit(self, X: list[TrialRecord], y=None):
        records = list(X)
        if not records:
            raise ValueError("cannot fit an empty record list")
        conditions = {r.condition for r in records}
        if len(conditions) != 1:
            raise ValueError(f"records span several conditions: {sorted(conditions)}")
        condition = self.condition or conditions.pop()
        hyper = self.hyper if self.hyper is not None else HyperParams.prior_means()

        c, g, yy = records_to_arrays(records)
        prior_mu = np.array(
            [hyper.mu_b0, hyper.mu_w0] + [hyper.alpha_prior(condition, f)[0] for f in RATE_FAMILIES]
        )
        prior_sd = np.array(
            [hyper.sigma_b0, hyper.sigma_w0] + [hyper.alpha_prior(condition, f)[1] for f in RATE_FAMILIES]
        )

        def objective(x):
            return neg_log_posterior_unconstrained(x, c, g, yy, prior_mu, prior_sd)

        rng = substream(self.seed, "map", records[0].participant_id)
        best = None
        converged = False
        n_evals = 0
        for _ in range(self.n_restarts):
            x0 = rng.normal(prior_mu, prior_sd)
            res = minimize(
                objective,
                x0,
                method="Nelder-Mead",
                options={
                    "xatol": self.xatol,
                    "fatol": np.inf,
                    "maxfev": self.max_evals,
                    "maxiter": self.max_evals,
                },
            )
            n_evals += res.nfev
            if best is None or res.fun < best.fun:
                best = res
                converged = bool(res.success)

        self.params_ = _params_from_x(best.x)
        self.log_posterior_ = float(-best.fun)
        self.converged_ = converged
        self.n_evaluations_ = int(n_evals)
        self.condition_ = condition
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("call fit() first")

    def fit_result(self) -> FitResult:
        self._check_fitted()
        return FitResult(
            params=self.params_,
            log_posterior_at_mode=self.log_posterior_,
            converged=self.converged_,
            n_evaluations=self.n_evaluations_,
        )

    def predict_proba(self, X: list[TrialRecord]) -> np.ndarray:
        """Perceived accuracy per trial, replaying the fitted recursion over X."""
        self._check_fitted()
        ordered = sorted(X, key=lambda r: r.trial_index)
        state = initial_state(self.params_)
        out = np.empty(len(ordered))
        for i, rec in enumerate(ordered):
            out[i] = perceive(state, rec.ai_confidence)
            state = update(self.params_, state, rec.ai_confidence, rec.ai_correct)
        return out

    def predict(self, X: list[TrialRecord]) -> np.ndarray:
        """Predicted judgments (v >= 0.5) per trial."""
        return self.predict_proba(X) >= 0.5


def fit_map(records: list[TrialRecord], hyper: HyperParams | None = None,
            condition: str | None = None, options: dict | None = None) -> FitResult:
    """Functional wrapper over MapEstimator; `options` maps to its keyword arguments."""
    est = MapEstimator(hyper=hyper, condition=condition, **(options or {}))
    return est.fit(records).fit_result()
