"""Step rules for the steepest-descent family.

All variants are explicit Euler in theta with exactly integrated EMA moments:

* SD(norm): theta' = theta + dt * eta(t) * u, with u the steepest direction of
  the gradient (normalized) or that direction scaled by the dual norm
  (unnormalized).
* MSD(norm, c1): same but the direction comes from the raw momentum m, which
  is updated with the current gradient before the direction is taken. Muon is
  MSD under the per-matrix spectral norm; Signum is normalized MSD under Linf.
* Adam(c1, c2, eps): theta' = theta - dt * eta(t) * m_hat / (sqrt(v_hat) + eps)
  with bias-corrected first/second moments and no stability constant beyond
  eps (default 1e-20).
* Composite: independent sub-rules on disjoint group sets, each with its own
  base learning-rate scale on a shared schedule.
"""

from dataclasses import dataclass, field

import numpy as np

from . import ema, norms
from .params import Layout, LayoutError, ParamVector


class NonFiniteUpdateError(FloatingPointError):
    """Raised when a step would write non-finite parameters."""


@dataclass(frozen=True)
class Constant:
    eta0: float

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")

    def eta(self, t):
        return self.eta0


@dataclass(frozen=True)
class PowerDecay:
    """eta(t) = eta0 * (t_init + t)^(-exponent); t_init >= 1 keeps eta(0) finite."""

    eta0: float
    exponent: float = 0.8
    t_init: float = 1.0

    def __post_init__(self):
        if not self.eta0 > 0:
            raise ValueError("eta0 must be positive")
        if not 0.0 <= self.exponent < 1.0:
            raise ValueError("exponent must lie in [0, 1)")
        if self.t_init < 1.0:
            raise ValueError("t_init must be >= 1")

    def eta(self, t):
        return self.eta0 * (self.t_init + t) ** (-self.exponent)


@dataclass(frozen=True)
class SD:
    norm: object
    normalized: bool = True


@dataclass(frozen=True)
class MSD:
    norm: object
    c1: float = ema.C1_DEFAULT
    normalized: bool = True


@dataclass(frozen=True)
class Adam:
    c1: float = ema.C1_DEFAULT
    c2: float = ema.C2_DEFAULT
    eps: float = 1e-20

    def __post_init__(self):
        if not self.c1 >= self.c2 > 0:
            raise ValueError("Adam requires c1 >= c2 > 0")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")


@dataclass(frozen=True)
class CompositePart:
    groups: tuple
    eta0_scale: float
    spec: object


@dataclass(frozen=True)
class Composite:
    parts: tuple

    def __post_init__(self):
        for part in self.parts:
            if isinstance(part.spec, Composite):
                raise LayoutError("composite parts cannot nest composites")
            if not part.eta0_scale > 0:
                raise ValueError("composite scales must be positive")


@dataclass
class OptimizerState:
    theta: ParamVector
    t: float = 0.0
    int_eta: float = 0.0
    step_index: int = 0
    m: object = None  # EmaState over the flat vector, for MSD/Adam
    v: object = None  # EmaState of squared gradients, for Adam
    parts: list = field(default_factory=list)  # sub-states for Composite


@dataclass(frozen=True)
class StepInfo:
    eta: float
    degenerate: bool  # direction source was zero: theta held


def init_state(spec, theta):
    state = OptimizerState(theta=theta.copy())
    if isinstance(spec, MSD):
        state.m = ema.fresh(spec.c1, like=theta.data)
    elif isinstance(spec, Adam):
        state.m = ema.fresh(spec.c1, like=theta.data)
        state.v = ema.fresh(spec.c2, like=theta.data)
    elif isinstance(spec, Composite):
        _check_composite(spec, theta.layout)
        for part in spec.parts:
            sub_theta = _take(theta, part.groups)
            state.parts.append(init_state(part.spec, sub_theta))
    return state


def _check_composite(spec, layout):
    seen = []
    for part in spec.parts:
        seen.extend(part.groups)
    if sorted(seen) != sorted(layout.names):
        raise LayoutError(
            f"composite parts {sorted(seen)} do not partition layout groups {sorted(layout.names)}"
        )


def _take(pv, names):
    layout = Layout([(n, pv.layout.group(n).kind, pv.layout.group(n).shape) for n in names])
    data = np.concatenate([pv.view(n).ravel() for n in names])
    return ParamVector(data, layout)


def _scatter(dst, names, sub):
    for name in names:
        dst.view(name)[...] = sub.view(name)


def _direction_step(norm_spec, source, normalized):
    """(delta-per-unit-lr, degenerate) for SD/MSD given the direction source."""
    if not np.any(source.data):
        return np.zeros_like(source.data), True
    u = norms.steepest_direction(norm_spec, source)
    if normalized:
        return u.data, False
    return norms.dual_norm(norm_spec, source) * u.data, False


def step(spec, state, g, schedule, dt=1.0):
    """Advance one step; returns (new_state, StepInfo).

    ``g`` is the loss gradient at state.theta. The reference learning rate
    eta(t) accumulates into int_eta without composite group scales.
    """
    if not np.all(np.isfinite(g.data)):
        raise NonFiniteUpdateError("gradient contains non-finite entries")
    eta_t = schedule.eta(state.t)
    new_state, degenerate = _apply(spec, state, g, eta_t, dt)
    new_state.t = state.t + dt
    new_state.int_eta = state.int_eta + dt * eta_t
    new_state.step_index = state.step_index + 1
    if not np.all(np.isfinite(new_state.theta.data)):
        raise NonFiniteUpdateError("step produced non-finite parameters")
    return new_state, StepInfo(eta=eta_t, degenerate=degenerate)


def _apply(spec, state, g, eta_t, dt):
    """Variant dispatch; returns (state-with-updated-theta-and-moments, degenerate)."""
    theta = state.theta
    if isinstance(spec, SD):
        delta, degenerate = _direction_step(spec.norm, g, spec.normalized)
        new_theta = ParamVector(theta.data + dt * eta_t * delta, theta.layout)
        return OptimizerState(theta=new_theta), degenerate
    if isinstance(spec, MSD):
        m = ema.ema_update(state.m, g.data, dt)
        m_pv = ParamVector(np.asarray(m.value), theta.layout)
        delta, degenerate = _direction_step(spec.norm, m_pv, spec.normalized)
        new_theta = ParamVector(theta.data + dt * eta_t * delta, theta.layout)
        return OptimizerState(theta=new_theta, m=m), degenerate
    if isinstance(spec, Adam):
        m = ema.ema_update(state.m, g.data, dt)
        v = ema.ema_update(state.v, g.data * g.data, dt)
        m_hat = ema.bias_correct(m)
        v_hat = ema.bias_correct(v)
        root = np.sqrt(v_hat) + spec.eps
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(root > 0.0, m_hat / np.where(root > 0.0, root, 1.0), 0.0)
        new_theta = ParamVector(theta.data - dt * eta_t * ratio, theta.layout)
        return OptimizerState(theta=new_theta, m=m, v=v), bool(not np.any(ratio))
    if isinstance(spec, Composite):
        new_theta = theta.copy()
        new_parts = []
        degenerate = True
        for part, sub_state in zip(spec.parts, state.parts):
            sub_g = _take(g, part.groups)
            new_sub, sub_degenerate = _apply(part.spec, sub_state, sub_g, part.eta0_scale * eta_t, dt)
            degenerate = degenerate and sub_degenerate
            _scatter(new_theta, part.groups, new_sub.theta)
            new_parts.append(new_sub)
        return OptimizerState(theta=new_theta, parts=new_parts), degenerate
    raise TypeError(f"unknown optimizer spec {spec!r}")


def build_muon_adam(layout, eta0_matrix, eta0_vector, c_matrix=ema.C1_DEFAULT,
                    c1=ema.C1_DEFAULT, c2=ema.C2_DEFAULT, eps=1e-20):
    """Composite Muon-on-matrices / Adam-on-vectors spec plus its margin norm.

    The associated norm is max(alpha * max-spectral over matrices, Linf over
    vectors) with alpha = eta0_vector / eta0_matrix, whose dual is
    (1/alpha) * sum-nuclear + L1.
    """
    if not (eta0_matrix > 0 and eta0_vector > 0):
        raise ValueError("base learning rates must be positive")
    matrices = layout.matrix_names()
    vectors = layout.vector_names()
    if not matrices:
        raise LayoutError("Muon-Adam needs at least one matrix group")
    if not vectors:
        raise LayoutError("Muon-Adam needs at least one vector group")
    spec = Composite(
        parts=(
            CompositePart(matrices, eta0_matrix, MSD(norms.SpectralPerMatrix(), c1=c_matrix)),
            CompositePart(vectors, eta0_vector, Adam(c1=c1, c2=c2, eps=eps)),
        )
    )
    alpha = eta0_vector / eta0_matrix
    margin_norm = norms.MaxOfGroups(
        parts=(
            norms.GroupPart(matrices, alpha, norms.SpectralPerMatrix()),
            norms.GroupPart(vectors, 1.0, norms.Linf()),
        )
    )
    return spec, margin_norm


def implied_norm(spec, layout):
    """Norm whose margin the optimizer implicitly maximizes.

    SD/MSD use their own norm; Adam behaves as sign descent, i.e. Linf; a
    composite combines its parts into a scaled max norm with Adam parts
    contributing Linf blocks.
    """
    if isinstance(spec, (SD, MSD)):
        return spec.norm
    if isinstance(spec, Adam):
        return norms.Linf()
    if isinstance(spec, Composite):
        # A part stepping with rate eta0_k * eta is a unit-ball step of the
        # (ref/eta0_k)-scaled norm under the reference rate; the reference is
        # the Adam part's rate when there is one, matching the
        # max(alpha * spectral, Linf) construction of build_muon_adam.
        ref = next(
            (p.eta0_scale for p in spec.parts if isinstance(p.spec, Adam)),
            spec.parts[0].eta0_scale,
        )
        parts = []
        for part in spec.parts:
            sub = implied_norm(part.spec, layout)
            parts.append(norms.GroupPart(part.groups, ref / part.eta0_scale, sub))
        return norms.MaxOfGroups(parts=tuple(parts))
    raise TypeError(f"unknown optimizer spec {spec!r}")
