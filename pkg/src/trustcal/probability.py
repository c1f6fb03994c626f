"""Shared probability-scale transforms (log-odds, logistic, display rounding)."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

CONFIDENCE_FLOOR = 0.05
CONFIDENCE_CEIL = 0.95

CONFIDENCE_GRID = np.round(np.arange(0, 11) / 10.0, 1)


def logit(p):
    """Log-odds ln(p / (1 - p)). Raises ValueError outside the open interval (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError(f"logit requires 0 < p < 1, got {p!r}")
    out = np.log(arr / (1.0 - arr))
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


def logistic(x):
    """Inverse of logit: 1 / (1 + exp(-x)), numerically stable for large |x|."""
    out = expit(np.asarray(x, dtype=float))
    return float(out) if np.isscalar(x) or out.ndim == 0 else out


def clamp_confidence(c):
    """Clamp a confidence in [0, 1] to [0.05, 0.95] so its log-odds stay finite.

    Displayed confidences are rounded to the 10% grid and can land on 0 or 1;
    the half-bin clamp keeps every downstream log-odds computation defined.
    """
    out = np.clip(np.asarray(c, dtype=float), CONFIDENCE_FLOOR, CONFIDENCE_CEIL)
    return float(out) if np.isscalar(c) or out.ndim == 0 else out


def round_to_display(c):
    """Round a raw confidence to the nearest multiple of 0.1 (the displayed value)."""
    out = np.round(np.asarray(c, dtype=float) * 10.0) / 10.0
    return float(out) if np.isscalar(c) or out.ndim == 0 else out


def on_display_grid(c, tol: float = 1e-9) -> bool:
    """True when c is (within tol) a multiple of 0.1 inside [0, 1]."""
    c = float(c)
    return -tol <= c <= 1.0 + tol and abs(c * 10.0 - round(c * 10.0)) <= tol * 10.0
