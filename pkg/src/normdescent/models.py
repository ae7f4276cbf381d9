"""Homogeneous predictors with analytic gradients.

Two model families: linear predictors (homogeneity degree 1) and two-layer
networks with power-ReLU activation max(0, z)^q (degree q + 1; q = 2 is
smooth, q = 1 is plain ReLU). The subgradient of ReLU at a zero preactivation
is fixed to 0 so the gradient is a single consistent selection.
"""

from dataclasses import dataclass

import numpy as np

from . import losses
from .params import Layout, LayoutError, ParamVector


@dataclass(frozen=True)
class Linear:
    dim: int

    @property
    def homogeneity_degree(self):
        return 1.0


@dataclass(frozen=True)
class TwoLayer:
    dim: int
    hidden: int
    activation_power: float = 2.0

    def __post_init__(self):
        if self.activation_power < 1.0:
            raise ValueError("activation power must be >= 1")

    @property
    def homogeneity_degree(self):
        return self.activation_power + 1.0


def layout_for(spec, output_as_matrix=False):
    """Parameter layout of a model.

    For TwoLayer the output weights are a plain vector by default; tagging
    them as a 1 x hidden matrix lets spectral optimizers address them.
    """
    if isinstance(spec, Linear):
        return Layout([("w", "vector", (spec.dim,))])
    if isinstance(spec, TwoLayer):
        u_tag = ("u", "matrix", (1, spec.hidden)) if output_as_matrix else ("u", "vector", (spec.hidden,))
        return Layout([("W", "matrix", (spec.hidden, spec.dim)), u_tag])
    raise TypeError(f"unknown model spec {spec!r}")


def init_params(spec, seed, scale=0.01, output_as_matrix=False):
    """Per-group N(0, 2/fan_in) entries scaled by ``scale``, seeded."""
    rng = np.random.default_rng(seed)
    layout = layout_for(spec, output_as_matrix)
    pv = ParamVector.zeros(layout)
    if isinstance(spec, Linear):
        pv.view("w")[...] = rng.normal(0.0, np.sqrt(2.0 / spec.dim), spec.dim) * scale
    else:
        pv.view("W")[...] = rng.normal(0.0, np.sqrt(2.0 / spec.dim), (spec.hidden, spec.dim)) * scale
        u = rng.normal(0.0, np.sqrt(2.0 / spec.hidden), spec.hidden) * scale
        pv.view("u")[...] = u.reshape(pv.layout.group("u").shape)
    return pv


def _check_x(spec, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (spec.dim,):
        raise LayoutError(f"feature vector of shape {x.shape} does not match dim {spec.dim}")
    return x


def forward(spec, theta, x):
    """Model output f(x; theta) for a single feature vector."""
    x = _check_x(spec, x)
    if isinstance(spec, Linear):
        return float(theta.view("w") @ x)
    if isinstance(spec, TwoLayer):
        s = theta.view("W") @ x
        a = np.maximum(s, 0.0) ** spec.activation_power
        return float(theta.view("u").ravel() @ a)
    raise TypeError(f"unknown model spec {spec!r}")


def grad(spec, theta, x):
    """Analytic gradient of forward w.r.t. theta for a single sample."""
    x = _check_x(spec, x)
    out = ParamVector.zeros(theta.layout)
    if isinstance(spec, Linear):
        out.view("w")[...] = x
        return out
    if isinstance(spec, TwoLayer):
        q = spec.activation_power
        u = theta.view("u").ravel()
        s = theta.view("W") @ x
        pos = s > 0.0
        a = np.where(pos, s, 0.0) ** q
        dact = np.where(pos, q * np.where(pos, s, 1.0) ** (q - 1.0), 0.0)
        out.view("W")[...] = (u * dact)[:, np.newaxis] * x[np.newaxis, :]
        out.view("u")[...] = a.reshape(theta.layout.group("u").shape)
        return out
    raise TypeError(f"unknown model spec {spec!r}")


def margins(spec, theta, dataset):
    """Vector of per-sample margins z_i = y_i * f(x_i; theta), batched."""
    X, y = dataset.features, dataset.labels
    if isinstance(spec, Linear):
        return y * (X @ theta.view("w"))
    if isinstance(spec, TwoLayer):
        s = X @ theta.view("W").T
        a = np.maximum(s, 0.0) ** spec.activation_power
        return y * (a @ theta.view("u").ravel())
    raise TypeError(f"unknown model spec {spec!r}")


def loss_gradient(spec, loss_spec, theta, dataset):
    """Gradient of the total loss: sum_i ell'(z_i) * y_i * grad f(x_i; theta).

    Returns (g, z, loss_value); z and the loss come along for free and every
    training-loop diagnostic needs them.
    """
    X, y = dataset.features, dataset.labels
    if X.shape[0] == 0:
        raise ValueError("empty dataset")
    z = margins(spec, theta, dataset)
    loss_value = losses.total_loss(loss_spec, z)
    coeff = losses.ell_prime(loss_spec, z) * y
    g = ParamVector.zeros(theta.layout)
    if isinstance(spec, Linear):
        g.view("w")[...] = X.T @ coeff
    elif isinstance(spec, TwoLayer):
        q = spec.activation_power
        u = theta.view("u").ravel()
        s = X @ theta.view("W").T
        pos = s > 0.0
        a = np.where(pos, s, 0.0) ** q
        dact = np.where(pos, q * np.where(pos, s, 1.0) ** (q - 1.0), 0.0)
        g.view("W")[...] = u[:, np.newaxis] * ((dact * coeff[:, np.newaxis]).T @ X)
        g.view("u")[...] = (a.T @ coeff).reshape(theta.layout.group("u").shape)
    else:
        raise TypeError(f"unknown model spec {spec!r}")
    return g, z, loss_value


def preactivation_signs(spec, theta, dataset):
    """Boolean matrix of hidden preactivation signs; None for models without one."""
    if not isinstance(spec, TwoLayer):
        return None
    return (dataset.features @ theta.view("W").T) > 0.0
