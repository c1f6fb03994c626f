from .model import (
    HyperParams,
    RATE_FAMILIES,
    draw_participant_params,
    log_likelihood,
    log_posterior,
    log_prior_hyper,
    log_prior_participant,
)
from .map import FitResult, MapEstimator, fit_map
from .samplers import AdaptiveMwgSampler, Block, PosteriorDraws
from .hierarchical import HierarchicalSampler, McmcConfig, sample_posterior
from .diagnostics import ess, rhat
from .trajectories import posterior_trajectories

__all__ = [
    "HyperParams",
    "RATE_FAMILIES",
    "draw_participant_params",
    "log_likelihood",
    "log_posterior",
    "log_prior_hyper",
    "log_prior_participant",
    "FitResult",
    "MapEstimator",
    "fit_map",
    "AdaptiveMwgSampler",
    "Block",
    "PosteriorDraws",
    "HierarchicalSampler",
    "McmcConfig",
    "sample_posterior",
    "ess",
    "rhat",
    "posterior_trajectories",
]
