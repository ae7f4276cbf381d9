"""Steepest-descent optimizers under general norms, with margin and KKT diagnostics.

The library implements the steepest-descent family (gradient descent, sign
descent, spectral descent / Muon, their momentum variants, and Adam without a
stability constant) as explicit-Euler discretizations of the corresponding
flows, together with the diagnostics used to observe their implicit bias on
homogeneous models: hard/soft margins per norm, parameter-gradient alignment,
and approximate-KKT residuals of the max-margin problem.
"""

from . import data, ema, linalg, losses, metrics, models, norms, optimizers, params

__all__ = [
    "data",
    "ema",
    "linalg",
    "losses",
    "metrics",
    "models",
    "norms",
    "optimizers",
    "params",
]

__version__ = "0.1.0"
