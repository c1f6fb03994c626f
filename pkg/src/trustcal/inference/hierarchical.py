"""Hierarchical model wiring for the Metropolis-within-Gibbs sampler.

Participant parameters are sampled non-centered: the state vector holds
standard-normal offsets z, and the natural values are mu + sigma * z. Hyper
scales are sampled as log(sigma) with the change-of-variables term included.
This keeps proposals well-behaved when per-participant data are weak.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..datastore import TrialRecord, group_by_participant
from ._kernels import loglik_core, records_to_arrays
from .model import ALPHA_HYPER_MEAN_LOC, ALPHA_HYPER_MEAN_SCALE, RATE_FAMILIES
from .samplers import AdaptiveMwgSampler, Block, PosteriorDraws

LOG_2PI = math.log(2.0 * math.pi)

PARTICIPANT_REPEATS = 6
HYPER_REPEATS = 8

_EXP_CAP = 700.0  # beyond this, exp overflows double precision


def _safe_exp(x: float) -> float:
    return math.exp(x) if x < _EXP_CAP else float("inf")


def _sigmoid(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x)) if x < _EXP_CAP else 1.0
    z = math.exp(x)
    return z / (1.0 + z)


@dataclass
class McmcConfig:
    n_chains: int = 4
    n_iterations: int = 2000
    n_warmup: int = 1000
    seed: int = 0


class _HierarchicalModel:
    """Flat-vector view of the hierarchy: index bookkeeping, densities, blocks."""

    def __init__(self, data: dict[str, list[TrialRecord]]):
        if not data:
            raise ValueError("no trial data")
        self.pids = sorted(data)
        self.cond_of = {}
        self.trials = {}
        for pid in self.pids:
            records = data[pid]
            conds = {r.condition for r in records}
            if len(conds) != 1:
                raise ValueError(f"participant {pid!r} has mixed conditions {conds}")
            self.cond_of[pid] = conds.pop()
            self.trials[pid] = records_to_arrays(records)
        self.conditions = sorted(set(self.cond_of.values()))

        # hyper layout: mu_b0, ls_b0, mu_w0, ls_w0, then (mu, ls) per (condition, family)
        self.alpha_slot = {}
        pos = 4
        for cond in self.conditions:
            for fam in RATE_FAMILIES:
                self.alpha_slot[(cond, fam)] = pos
                pos += 2
        self.n_hyper = pos
        self.part_offset = {pid: self.n_hyper + 6 * i for i, pid in enumerate(self.pids)}
        self.dim = self.n_hyper + 6 * len(self.pids)

    # -- natural-scale views ------------------------------------------------

    def participant_naturals(self, theta: np.ndarray, pid: str):
        off = self.part_offset[pid]
        z = theta[off : off + 6]
        b0 = theta[0] + _safe_exp(theta[1]) * z[0]
        w0 = theta[2] + _safe_exp(theta[3]) * z[1]
        alphas = np.empty(4)
        for j, fam in enumerate(RATE_FAMILIES):
            slot = self.alpha_slot[(self.cond_of[pid], fam)]
            la = theta[slot] + _safe_exp(theta[slot + 1]) * z[2 + j]
            alphas[j] = _sigmoid(la)
        return b0, w0, alphas

    def _loglik(self, theta: np.ndarray, pid: str) -> float:
        b0, w0, a = self.participant_naturals(theta, pid)
        c, g, y = self.trials[pid]
        return loglik_core(b0, w0, a[0], a[1], a[2], a[3], c, g, y)

    def _z_prior(self, theta: np.ndarray, pid: str) -> float:
        off = self.part_offset[pid]
        z = theta[off : off + 6]
        return float(-0.5 * np.sum(z * z) - 3.0 * LOG_2PI)

    @staticmethod
    def _mu_ls_prior(mu: float, ls: float, mu_loc: float, mu_scale: float) -> float:
        if ls >= _EXP_CAP:
            return float("-inf")
        zmu = (mu - mu_loc) / mu_scale
        lp = -0.5 * zmu * zmu - math.log(mu_scale) - 0.5 * LOG_2PI
        lp += -math.exp(ls) + ls  # Exponential(1) on sigma, log-scale Jacobian
        return lp

    def _hyper_prior(self, theta: np.ndarray) -> float:
        lp = self._mu_ls_prior(theta[0], theta[1], 0.0, 1.0)
        lp += self._mu_ls_prior(theta[2], theta[3], 0.0, 1.0)
        for cond in self.conditions:
            for fam in RATE_FAMILIES:
                slot = self.alpha_slot[(cond, fam)]
                lp += self._mu_ls_prior(
                    theta[slot], theta[slot + 1], ALPHA_HYPER_MEAN_LOC, ALPHA_HYPER_MEAN_SCALE
                )
        return lp

    def log_posterior(self, theta: np.ndarray) -> float:
        lp = self._hyper_prior(theta)
        for pid in self.pids:
            lp += self._z_prior(theta, pid) + self._loglik(theta, pid)
        return lp

    # -- sampler wiring -----------------------------------------------------

    def blocks(self) -> list[Block]:
        blocks = []
        for pid in self.pids:
            off = self.part_offset[pid]
            idx = np.arange(off, off + 6)

            def terms(theta, pid=pid):
                return self._z_prior(theta, pid) + self._loglik(theta, pid)

            blocks.append(
                Block(name=f"participant[{pid}]", indices=idx, repeats=PARTICIPANT_REPEATS,
                      logpost_terms=terms)
            )

        def init_terms(theta, lo: int):
            lp = self._mu_ls_prior(theta[lo], theta[lo + 1], 0.0, 1.0)
            for pid in self.pids:
                lp += self._loglik(theta, pid)
            return lp

        blocks.append(
            Block(name="hyper_b0", indices=np.array([0, 1]), repeats=HYPER_REPEATS,
                  logpost_terms=lambda th: init_terms(th, 0))
        )
        blocks.append(
            Block(name="hyper_w0", indices=np.array([2, 3]), repeats=HYPER_REPEATS,
                  logpost_terms=lambda th: init_terms(th, 2))
        )
        for cond in self.conditions:
            members = [pid for pid in self.pids if self.cond_of[pid] == cond]
            for fam in RATE_FAMILIES:
                slot = self.alpha_slot[(cond, fam)]

                def terms(theta, slot=slot, members=members):
                    lp = self._mu_ls_prior(
                        theta[slot], theta[slot + 1], ALPHA_HYPER_MEAN_LOC, ALPHA_HYPER_MEAN_SCALE
                    )
                    for pid in members:
                        lp += self._loglik(theta, pid)
                    return lp

                blocks.append(
                    Block(name=f"hyper_alpha_{fam}[{cond}]",
                          indices=np.array([slot, slot + 1]),
                          repeats=HYPER_REPEATS, logpost_terms=terms)
                )
        return blocks

    def init(self, rng: np.random.Generator) -> np.ndarray:
        theta = np.empty(self.dim)
        theta[0] = rng.normal(0.0, 1.0)
        theta[1] = math.log(max(rng.exponential(1.0), 0.05))
        theta[2] = rng.normal(0.0, 1.0)
        theta[3] = math.log(max(rng.exponential(1.0), 0.05))
        for cond in self.conditions:
            for fam in RATE_FAMILIES:
                slot = self.alpha_slot[(cond, fam)]
                theta[slot] = rng.normal(ALPHA_HYPER_MEAN_LOC, ALPHA_HYPER_MEAN_SCALE)
                theta[slot + 1] = math.log(max(rng.exponential(1.0), 0.05))
        for pid in self.pids:
            off = self.part_offset[pid]
            theta[off : off + 6] = rng.normal(0.0, 1.0, size=6)
        return theta

    # -- reporting ------------------------------------------------------------

    def parameter_names(self) -> list[str]:
        names = ["mu_b0", "sigma_b0", "mu_w0", "sigma_w0"]
        for cond in self.conditions:
            for fam in RATE_FAMILIES:
                names += [f"mu_alpha_{fam}[{cond}]", f"sigma_alpha_{fam}[{cond}]"]
        for pid in self.pids:
            names += [f"b0[{pid}]", f"w0[{pid}]"]
            names += [f"logit_alpha_{fam}[{pid}]" for fam in RATE_FAMILIES]
        return names

    def transform_draws(self, raw: np.ndarray) -> np.ndarray:
        """Raw sampler states -> reported parameters (sigmas exponentiated,
        participant offsets re-centered to natural values)."""
        n_chains, n_iter, _ = raw.shape
        out = np.empty((n_chains, n_iter, self.n_hyper + 6 * len(self.pids)))
        out[:, :, 0] = raw[:, :, 0]
        out[:, :, 1] = np.exp(raw[:, :, 1])
        out[:, :, 2] = raw[:, :, 2]
        out[:, :, 3] = np.exp(raw[:, :, 3])
        for cond in self.conditions:
            for fam in RATE_FAMILIES:
                slot = self.alpha_slot[(cond, fam)]
                out[:, :, slot] = raw[:, :, slot]
                out[:, :, slot + 1] = np.exp(raw[:, :, slot + 1])
        col = self.n_hyper
        for pid in self.pids:
            off = self.part_offset[pid]
            out[:, :, col] = raw[:, :, 0] + np.exp(raw[:, :, 1]) * raw[:, :, off]
            out[:, :, col + 1] = raw[:, :, 2] + np.exp(raw[:, :, 3]) * raw[:, :, off + 1]
            for j, fam in enumerate(RATE_FAMILIES):
                slot = self.alpha_slot[(self.cond_of[pid], fam)]
                out[:, :, col + 2 + j] = (
                    raw[:, :, slot] + np.exp(raw[:, :, slot + 1]) * raw[:, :, off + 2 + j]
                )
            col += 6
        return out


def _as_groups(data) -> dict[str, list[TrialRecord]]:
    if isinstance(data, dict):
        return {pid: sorted(recs, key=lambda r: r.trial_index) for pid, recs in data.items()}
    return group_by_participant(list(data))


def sample_posterior(data, config: McmcConfig | None = None) -> PosteriorDraws:
    """Hierarchical posterior draws for all participants in `data`.

    `data` is a flat record list or a {participant_id: records} mapping.
    Warmup iterations are dropped from the returned draws.
    """
    config = config or McmcConfig()
    model = _HierarchicalModel(_as_groups(data))
    sampler = AdaptiveMwgSampler(
        dim=model.dim,
        log_posterior=model.log_posterior,
        blocks=model.blocks(),
        init=model.init,
        n_chains=config.n_chains,
        n_iterations=config.n_iterations,
        n_warmup=config.n_warmup,
        seed=config.seed,
    )
    raw, _ = sampler.run()
    return PosteriorDraws(
        names=model.parameter_names(),
        draws=model.transform_draws(raw),
        seed=config.seed,
    )


class HierarchicalSampler(BaseEstimator):
    """Estimator facade over sample_posterior with convergence bookkeeping."""

    def __init__(self, n_chains=4, n_iterations=2000, n_warmup=1000, seed=0,
                 rhat_threshold=1.01, ess_threshold=400.0):
        self.n_chains = n_chains
        self.n_iterations = n_iterations
        self.n_warmup = n_warmup
        self.seed = seed
        self.rhat_threshold = rhat_threshold
        self.ess_threshold = ess_threshold

    def fit(self, X, y=None):
        config = McmcConfig(
            n_chains=self.n_chains,
            n_iterations=self.n_iterations,
            n_warmup=self.n_warmup,
            seed=self.seed,
        )
        self.draws_ = sample_posterior(X, config)
        self.summary_ = self.draws_.summary()
        rhats = [s["rhat"] for s in self.summary_.values()]
        esses = [s["ess"] for s in self.summary_.values()]
        self.max_rhat_ = float(max(rhats))
        self.min_ess_ = float(min(esses))
        self.diagnostics_ok_ = bool(
            self.max_rhat_ < self.rhat_threshold and self.min_ess_ > self.ess_threshold
        )
        return self

    def summary(self) -> dict:
        if not hasattr(self, "summary_"):
            raise NotFittedError("call fit() first")
        return self.summary_
