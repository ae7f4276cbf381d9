"""Trajectory diagnostics: margins, alignment, and approximate-KKT residuals.

The KKT residuals quantify how close a training snapshot is to a stationary
point of the norm-minimization-under-margin-constraints problem:

* the snapshot is rescaled to the feasible point theta_hat = theta / q_min^(1/L),
* multipliers lambda_i are built from the per-sample loss terms so that
  sum_i lambda_i y_i h_i_hat equals -|theta_hat| * g / dual_norm(g) exactly,
* epsilon is the Euclidean distance of -g / dual_norm(g) to the norm's
  subdifferential at theta_hat (scaled by |theta_hat|), computable in closed
  form for L2 and via simplex projection for Linf,
* delta is the complementary-slackness sum lambda_i * (z_i / q_min - 1) >= 0.
"""

from dataclasses import dataclass

import numpy as np

from . import losses, models, norms
from .params import ParamVector


class InfeasibleDirectionError(ValueError):
    """Raised when KKT residuals are requested at a snapshot with q_min <= 0."""


# A coordinate is in the Linf active set when within this relative tolerance
# of the max; floating-point ties are generic late in training.
ACTIVE_SET_RTOL = 1e-8


@dataclass(frozen=True)
class MarginReport:
    q_min: float
    hard_margin: float
    soft_margin: float        # nan when undefined (loss above ell(0))
    norm_value: float
    per_sample: np.ndarray


@dataclass(frozen=True)
class AlignmentReport:
    r: float                   # realized-step alignment <delta/(dt nu), -g/|g|*>
    parameter_alignment: float  # <theta/|theta|, -g/|g|*>
    nu_used: float
    ratio_norm_over_accum: float  # |theta| / integral of the rate; nan if unknown


@dataclass(frozen=True)
class KKTReport:
    epsilon: float             # nan when the norm's subdifferential is not handled
    delta: float
    lambdas: np.ndarray
    alignment_surrogate: float  # 1 - parameter_alignment, logged for all norms


def margins(model_spec, loss_spec, norm_spec, theta, dataset):
    """Hard margin q_min / |theta|^L and its loss-based soft surrogate."""
    if not np.any(theta.data):
        raise ValueError("margins undefined at theta = 0")
    z = models.margins(model_spec, theta, dataset)
    q_min = float(np.min(z))
    norm_value = norms.norm(norm_spec, theta)
    degree = model_spec.homogeneity_degree
    hard = q_min / norm_value**degree
    loss_value = losses.total_loss(loss_spec, z)
    log_inv = np.log(1.0 / loss_value) if loss_value > 0 else np.inf
    if log_inv > float(losses.phi(loss_spec, 0.0)):
        soft = losses.phi_inv(loss_spec, min(log_inv, 1e300)) / norm_value**degree
    else:
        soft = np.nan
    return MarginReport(
        q_min=q_min,
        hard_margin=hard,
        soft_margin=soft,
        norm_value=norm_value,
        per_sample=z,
    )


def parameter_alignment(norm_spec, theta, g):
    """<theta / |theta|, -g / |g|_*>; at most 1 by definition of the dual norm."""
    ntheta = norms.norm(norm_spec, theta)
    ndual = norms.dual_norm(norm_spec, g)
    if ntheta <= 0 or ndual <= 0:
        raise ValueError("parameter alignment needs nonzero theta and gradient")
    return float(theta.data @ (-g.data)) / (ntheta * ndual)


def alignment(norm_spec, theta, g, delta_theta, dt, nu, int_rate=None):
    """Realized-step alignment r = <delta/(dt*nu), -g/|g|_*> plus companions."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    ndual = norms.dual_norm(norm_spec, g)
    if ndual <= 0:
        raise ValueError("alignment undefined for zero gradient")
    r = float(delta_theta @ (-g.data)) / (dt * nu * ndual)
    par = parameter_alignment(norm_spec, theta, g)
    ratio = np.nan
    if int_rate is not None and int_rate > 0:
        ratio = norms.norm(norm_spec, theta) / int_rate
    return AlignmentReport(r=r, parameter_alignment=par, nu_used=nu, ratio_norm_over_accum=ratio)


def project_simplex(w):
    """Euclidean projection onto the probability simplex (sort-based, exact)."""
    w = np.asarray(w, dtype=np.float64)
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    rho_candidates = u + (1.0 - css) / np.arange(1, w.size + 1)
    rho = int(np.nonzero(rho_candidates > 0)[0][-1])
    tau = (1.0 - css[rho]) / (rho + 1)
    return np.maximum(w + tau, 0.0)


def _dist_to_norm_subdifferential(norm_spec, theta_hat, v):
    """Euclidean distance of v to the subdifferential of the norm at theta_hat.

    Closed form for L2 (a single point) and Linf (simplex projection on the
    active coordinates); nan for other norms, where the alignment surrogate is
    the monitored quantity instead.
    """
    x = theta_hat.data
    if isinstance(norm_spec, norms.L2):
        point = x / np.linalg.norm(x)
        return float(np.linalg.norm(v - point))
    if isinstance(norm_spec, norms.Linf):
        absx = np.abs(x)
        top = absx.max()
        active = absx >= (1.0 - ACTIVE_SET_RTOL) * top
        w = np.sign(x[active]) * v[active]
        proj = project_simplex(w)
        inactive_sq = float(np.sum(v[~active] ** 2))
        return float(np.sqrt(inactive_sq + np.sum((w - proj) ** 2)))
    return np.nan


def kkt_residuals(model_spec, loss_spec, norm_spec, theta, dataset, g=None, z=None):
    """Approximate-KKT residuals (epsilon, delta) of the max-margin problem.

    ``g`` and ``z`` may be passed in when the caller already holds the loss
    gradient and per-sample margins at ``theta``.
    """
    if z is None:
        z = models.margins(model_spec, theta, dataset)
    q_min = float(np.min(z))
    if q_min <= 0:
        raise InfeasibleDirectionError(f"q_min = {q_min} <= 0; no feasible rescaling")
    if g is None:
        g, _, _ = models.loss_gradient(model_spec, loss_spec, theta, dataset)
    g_dual = norms.dual_norm(norm_spec, g)
    if g_dual <= 0:
        raise InfeasibleDirectionError("zero loss gradient")
    degree = model_spec.homogeneity_degree

    theta_hat = ParamVector(theta.data / q_min ** (1.0 / degree), theta.layout)
    norm_hat = norms.norm(norm_spec, theta_hat)
    ell_z = losses.ell(loss_spec, z)
    phi_p = losses.phi_prime(loss_spec, z)
    lambdas = norm_hat * q_min ** (1.0 - 1.0 / degree) * ell_z * phi_p / g_dual

    v = -g.data / g_dual
    dist = _dist_to_norm_subdifferential(norm_spec, theta_hat, v)
    epsilon = norm_hat * dist if np.isfinite(dist) else np.nan

    delta = float(np.sum(lambdas * (z / q_min - 1.0)))
    surrogate = 1.0 - parameter_alignment(norm_spec, theta, g)
    return KKTReport(
        epsilon=epsilon,
        delta=delta,
        lambdas=lambdas,
        alignment_surrogate=surrogate,
    )


def adam_sign_agreement(m_hat, v_hat, g, threshold):
    """Mean |m_hat/sqrt(v_hat) - sign(g)| over coordinates carrying at least
    ``threshold`` of the gradient's L1 mass; (indices, nan) when none do."""
    g = np.asarray(g, dtype=np.float64)
    total = np.sum(np.abs(g))
    if total <= 0:
        return np.array([], dtype=int), np.nan
    active = np.nonzero(np.abs(g) / total > threshold)[0]
    if active.size == 0:
        return active, np.nan
    ratio = np.asarray(m_hat)[active] / np.sqrt(np.asarray(v_hat)[active])
    stat = float(np.mean(np.abs(ratio - np.sign(g[active]))))
    return active, stat


def adam_path_bound(max_abs_theta, int_eta, burn_in=1):
    """Running per-coordinate path ratio max_j |theta_t[j]| / int_0^t eta.

    Takes per-step traces (the max over j is already folded into
    ``max_abs_theta``); entries before ``burn_in`` steps or with int_eta <= 0
    are skipped. Returns the trace of ratios and their maximum.
    """
    max_abs_theta = np.asarray(max_abs_theta, dtype=np.float64)
    int_eta = np.asarray(int_eta, dtype=np.float64)
    ratios = np.full_like(max_abs_theta, np.nan)
    valid = np.zeros(max_abs_theta.size, dtype=bool)
    valid[burn_in:] = int_eta[burn_in:] > 0
    ratios[valid] = max_abs_theta[valid] / int_eta[valid]
    peak = float(np.nanmax(ratios)) if valid.any() else np.nan
    return ratios, peak
