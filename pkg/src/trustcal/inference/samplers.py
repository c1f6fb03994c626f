"""Adaptive random-walk Metropolis-within-Gibbs over parameter blocks.

The sampler sweeps a list of blocks; each block proposes a Gaussian step on
its coordinates of the flat unconstrained state vector. Per-block proposal
scales adapt during warmup toward ~30% acceptance (diminishing Robbins-Monro
steps on the log scale) and are frozen afterward, so the post-warmup kernel is
a valid fixed Metropolis kernel. Chains use independent RNG substreams and can
be reproduced bit-exactly from the seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ..streams import substream

ACCEPT_TARGET = 0.3


@dataclass
class Block:
    """One Gibbs block: a named set of coordinates updated jointly.

    `logpost_terms`, when given, evaluates just the posterior terms that
    depend on this block's coordinates (anything else cancels in the
    Metropolis ratio). `repeats` controls how many proposals the block makes
    per sweep.
    """

    name: str
    indices: np.ndarray
    repeats: int = 1
    init_scale: float = 0.5
    logpost_terms: object = None  # callable(theta) -> float


@dataclass
class PosteriorDraws:
    """Labeled post-warmup draws with chain structure; draws[chain, iteration, parameter]."""

    names: list[str]
    draws: np.ndarray
    seed: int
    n_chains: int = field(init=False)
    n_iterations: int = field(init=False)

    def __post_init__(self):
        self.n_chains, self.n_iterations, _ = self.draws.shape

    def parameter(self, name: str) -> np.ndarray:
        """(n_chains, n_iterations) draws for one parameter."""
        try:
            j = self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown parameter {name!r}")
        return self.draws[:, :, j]

    def flat(self, name: str) -> np.ndarray:
        return self.parameter(name).reshape(-1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["chain", "iteration"] + self.names)
            for ch in range(self.n_chains):
                for it in range(self.n_iterations):
                    writer.writerow(
                        [ch, it] + [f"{x:.10g}" for x in self.draws[ch, it]]
                    )

    @classmethod
    def from_csv(cls, path) -> "PosteriorDraws":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[:2] != ["chain", "iteration"]:
                raise ValueError(f"not a draws CSV: header starts with {header[:2]}")
            names = header[2:]
            rows = [(int(r[0]), int(r[1]), [float(x) for x in r[2:]]) for r in reader]
        n_chains = max(r[0] for r in rows) + 1
        n_iter = max(r[1] for r in rows) + 1
        draws = np.empty((n_chains, n_iter, len(names)))
        for ch, it, vals in rows:
            draws[ch, it] = vals
        return cls(names=names, draws=draws, seed=-1)

    def summary(self) -> dict:
        from .diagnostics import ess, rhat

        out = {}
        for j, name in enumerate(self.names):
            x = self.draws[:, :, j]
            flat = x.reshape(-1)
            q = np.percentile(flat, [2.5, 50.0, 97.5])
            out[name] = {
                "mean": float(flat.mean()),
                "sd": float(flat.std(ddof=1)) if flat.size > 1 else 0.0,
                "q2.5": float(q[0]),
                "q50": float(q[1]),
                "q97.5": float(q[2]),
                "rhat": float(rhat(x)),
                "ess": float(ess(x)),
            }
        return out


class AdaptiveMwgSampler:
    """Run adaptive Metropolis-within-Gibbs on a flat parameter vector.

    Parameters
    ----------
    dim : total number of unconstrained coordinates.
    log_posterior : callable(theta) -> float, the full joint log-density.
    blocks : list of Block covering the coordinates to sample.
    init : callable(rng) -> theta0, drawing a chain's starting point.
    """

    def __init__(self, dim, log_posterior, blocks, init,
                 n_chains=4, n_iterations=2000, n_warmup=1000, seed=0):
        if n_warmup >= n_iterations:
            raise ValueError("n_warmup must be smaller than n_iterations")
        self.dim = dim
        self.log_posterior = log_posterior
        self.blocks = blocks
        self.init = init
        self.n_chains = n_chains
        self.n_iterations = n_iterations
        self.n_warmup = n_warmup
        self.seed = seed

    def _run_chain(self, chain: int):
        rng = substream(self.seed, "chain", chain)
        theta = np.asarray(self.init(rng), dtype=float).copy()
        if theta.shape != (self.dim,):
            raise ValueError(f"init returned shape {theta.shape}, expected ({self.dim},)")

        n_kept = self.n_iterations - self.n_warmup
        kept = np.empty((n_kept, self.dim))
        log_scales = np.zeros(len(self.blocks))
        accept_counts = np.zeros(len(self.blocks))
        proposal_counts = np.zeros(len(self.blocks))
        term_fns = [blk.logpost_terms or self.log_posterior for blk in self.blocks]

        for it in range(self.n_iterations):
            adapting = it < self.n_warmup
            for k, blk in enumerate(self.blocks):
                idx = blk.indices
                width = blk.init_scale * np.exp(log_scales[k])
                # other blocks may have moved coordinates these terms depend on
                current = term_fns[k](theta)
                for _ in range(blk.repeats):
                    step = rng.normal(0.0, width, size=idx.size)
                    prop = theta.copy()
                    prop[idx] += step
                    proposed = term_fns[k](prop)
                    log_ratio = proposed - current
                    if np.isnan(log_ratio):
                        accept_prob = 0.0
                    else:
                        accept_prob = float(np.exp(min(log_ratio, 0.0)))
                    if rng.random() < accept_prob:
                        theta = prop
                        current = proposed
                        accept_counts[k] += 1
                    proposal_counts[k] += 1
                    if adapting:
                        gamma = 1.0 / (1.0 + it) ** 0.6
                        log_scales[k] += gamma * (accept_prob - ACCEPT_TARGET)
            if not adapting:
                kept[it - self.n_warmup] = theta
        rates = accept_counts / np.maximum(proposal_counts, 1)
        return kept, rates

    def run(self) -> tuple[np.ndarray, np.ndarray]:
        """Returns (draws[chain, kept_iteration, dim], acceptance_rates[chain, block])."""
        n_kept = self.n_iterations - self.n_warmup
        draws = np.empty((self.n_chains, n_kept, self.dim))
        rates = np.empty((self.n_chains, len(self.blocks)))
        for ch in range(self.n_chains):
            draws[ch], rates[ch] = self._run_chain(ch)
        return draws, rates
