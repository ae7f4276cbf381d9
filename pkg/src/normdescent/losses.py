"""Exponentially tailed losses ell(u) = exp(-phi(u)) and their phi machinery.

phi is strictly increasing and convex with bounded derivatives; the
exponential loss has phi(u) = u and the logistic loss
ell(u) = log(1 + exp(-u)) has phi(u) = -log log(1 + exp(-u)). Soft margins
and KKT residuals need phi, phi', and the inverse phi^{-1}.
"""

from dataclasses import dataclass

import numpy as np


class RangeError(ValueError):
    """Raised when phi_inv is requested outside the range of phi."""


@dataclass(frozen=True)
class Exponential:
    pass


@dataclass(frozen=True)
class Logistic:
    pass


# Above this argument, log(1 + exp(-u)) == exp(-u) to double precision and the
# direct expression -log(log1p(exp(-u))) starts losing digits (and underflows
# to -log(0) past u ~ 745), so the tail series phi = u + exp(-u)/2 is used.
_LOG_TAIL = 36.0


def _softplus(u):
    """log(1 + exp(-u)) evaluated on the numerically stable branch."""
    u = np.asarray(u, dtype=np.float64)
    return np.where(u >= 0, np.log1p(np.exp(-np.abs(u))), -u + np.log1p(np.exp(-np.abs(u))))


def phi(spec, u):
    u = np.asarray(u, dtype=np.float64)
    if isinstance(spec, Exponential):
        return u + 0.0
    if isinstance(spec, Logistic):
        small = np.minimum(u, _LOG_TAIL)
        body = -np.log(_softplus(small))
        tail = u + 0.5 * np.exp(-np.minimum(np.maximum(u, _LOG_TAIL), 745.0))
        return np.where(u > _LOG_TAIL, tail, body)
    raise TypeError(f"unknown loss spec {spec!r}")


def phi_prime(spec, u):
    u = np.asarray(u, dtype=np.float64)
    if isinstance(spec, Exponential):
        return np.ones_like(u)
    if isinstance(spec, Logistic):
        small = np.minimum(u, _LOG_TAIL)
        x = np.exp(-np.abs(small))
        sig = np.where(small >= 0, x / (1.0 + x), 1.0 / (1.0 + x))  # sigmoid(-u)
        body = sig / _softplus(small)
        tail = 1.0 - 0.5 * np.exp(-np.minimum(np.maximum(u, _LOG_TAIL), 745.0))
        return np.where(u > _LOG_TAIL, tail, body)
    raise TypeError(f"unknown loss spec {spec!r}")


def phi_inv(spec, v):
    """Inverse of phi; scalar in, scalar out.

    For the exponential loss this is the identity. For the logistic loss phi is
    a bijection onto the reals with no elementary inverse, so the root is
    bracketed and polished by safeguarded Newton to ~1e-12 in u.
    """
    v = float(v)
    if not np.isfinite(v):
        raise RangeError(f"phi_inv argument must be finite, got {v}")
    if isinstance(spec, Exponential):
        return v
    if isinstance(spec, Logistic):
        return _logistic_phi_inv(v)
    raise TypeError(f"unknown loss spec {spec!r}")


def _logistic_phi_inv(v):
    # Initial guess from the two asymptotes: phi(u) ~ u for large u and
    # phi(u) ~ -log(-u) for very negative u.
    u = v if v > 1.0 else -np.exp(-v)
    lo, hi = u, u
    step = 1.0 + abs(u)
    for _ in range(200):
        if phi(Logistic(), lo) <= v:
            break
        lo -= step
        step *= 2.0
    else:
        raise RangeError(f"failed to bracket phi_inv({v})")
    step = 1.0 + abs(u)
    for _ in range(200):
        if phi(Logistic(), hi) >= v:
            break
        hi += step
        step *= 2.0
    else:
        raise RangeError(f"failed to bracket phi_inv({v})")

    u = 0.5 * (lo + hi)
    for _ in range(200):
        f = float(phi(Logistic(), u)) - v
        if f > 0:
            hi = u
        else:
            lo = u
        d = float(phi_prime(Logistic(), u))
        u_new = u - f / d
        if not lo <= u_new <= hi:
            u_new = 0.5 * (lo + hi)
        if abs(u_new - u) <= 1e-12 * (1.0 + abs(u_new)):
            return u_new
        u = u_new
    return u


def ell(spec, u):
    """Per-sample loss exp(-phi(u))."""
    return np.exp(-phi(spec, u))


def ell_prime(spec, u):
    """Derivative of the per-sample loss: -phi'(u) * exp(-phi(u))."""
    return -phi_prime(spec, u) * np.exp(-phi(spec, u))


def total_loss(spec, margins):
    """Sum of exp(-phi(z_i)) over the margin vector; 0.0 for an empty vector."""
    z = np.asarray(margins, dtype=np.float64)
    if z.size == 0:
        return 0.0
    return float(np.sum(np.exp(-phi(spec, z))))
