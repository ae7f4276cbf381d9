"""Exponential moving averages as exact integrators of dm/dt = c (g - m).

The update holds the input constant over each step and integrates the ODE
exactly, so it is unconditionally stable and reduces to discrete
beta-momentum with beta = exp(-c * dt); c = -log(0.9) reproduces the usual
0.9 momentum at dt = 1.
"""

from dataclasses import dataclass

import numpy as np

# Continuous rates matching the discrete defaults beta1 = 0.9, beta2 = 0.999.
C1_DEFAULT = float(-np.log(0.9))
C2_DEFAULT = float(-np.log(0.999))


class UndefinedCorrectionError(ValueError):
    """Raised when bias correction is requested at elapsed time 0."""


@dataclass(frozen=True)
class EmaState:
    value: object  # ndarray or float, zero at elapsed == 0
    rate: float
    elapsed: float = 0.0


def fresh(rate, like=0.0):
    """Zero-initialized state with the shape of ``like``."""
    value = np.zeros_like(like, dtype=np.float64) if np.ndim(like) else 0.0
    return EmaState(value=value, rate=float(rate), elapsed=0.0)


def ema_update(state, g, dt):
    """Advance by dt with g held constant: m' = e^{-c dt} m + (1 - e^{-c dt}) g."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    decay = np.exp(-state.rate * dt)
    value = decay * state.value + (1.0 - decay) * np.asarray(g, dtype=np.float64)
    if np.ndim(value) == 0:
        value = float(value)
    return EmaState(value=value, rate=state.rate, elapsed=state.elapsed + dt)


def bias_correct(state):
    """value / (1 - e^{-c t}); undefined at t = 0."""
    if state.elapsed <= 0.0:
        raise UndefinedCorrectionError("bias correction undefined at elapsed time 0")
    return state.value / (1.0 - np.exp(-state.rate * state.elapsed))


def ema_series(samples, rate, dt):
    """EMA values after each step for a whole sample sequence (scalar signal)."""
    samples = np.asarray(samples, dtype=np.float64)
    decay = np.exp(-rate * dt)
    out = np.empty_like(samples)
    m = 0.0
    w = 1.0 - decay
    for i in range(samples.size):
        m = decay * m + w * samples[i]
        out[i] = m
    return out


@dataclass(frozen=True)
class RatioProbeResult:
    ratio: float
    target: float
    deviation: float
    horizon: float


def ratio_probe(g, rate, k_expected, horizon, dt):
    """Asymptotic momentum-to-signal ratio check.

    Integrates the EMA of ``g`` (a positive scalar function of time, sampled
    at step midpoints so the piecewise-constant quadrature is second order)
    up to ``horizon`` and reports the terminal ratio m(T)/g(T) against the
    limit c / (c - k) expected when -d log g / dt -> k < c.
    """
    if not k_expected < rate:
        raise ValueError("ratio target c/(c-k) requires k < c")
    steps = int(round(horizon / dt))
    times = (np.arange(steps) + 0.5) * dt
    samples = np.asarray([g(t) for t in times], dtype=np.float64)
    if np.any(samples <= 0):
        raise ValueError("ratio probe requires a positive signal")
    m = ema_series(samples, rate, dt)[-1]
    g_end = float(g(steps * dt))
    ratio = float(m / g_end)
    target = rate / (rate - k_expected)
    return RatioProbeResult(ratio=ratio, target=target, deviation=ratio - target, horizon=steps * dt)


def adam_ratio_bound(c1, c2):
    """Constant of the uniform momentum ratio bound |m_t| <= K * sqrt(v_t).

    Valid for rates with c1 > c2 / 2; equality-of-rates gives K = 1.
    """
    if not c1 > c2 / 2 > 0:
        raise ValueError("bound requires c1 > c2/2 > 0")
    return c1 / np.sqrt(c2 * (2.0 * c1 - c2))
