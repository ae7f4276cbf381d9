"""Norms, dual norms, and steepest-direction oracles.

Each norm spec describes the norm governing a steepest-descent trajectory.
``steepest_direction(spec, g)`` returns the minimizer of <u, g> over the unit
ball of the norm, which satisfies <u, g> = -dual_norm(spec, g); gradient
descent, sign descent and spectral descent are the L2 / Linf / spectral
realizations of this single oracle.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .params import LayoutError, Layout, ParamVector


class DegenerateGradientError(ValueError):
    """Raised when a steepest direction is requested for a zero vector."""


@dataclass(frozen=True)
class L1:
    pass


@dataclass(frozen=True)
class L2:
    pass


@dataclass(frozen=True)
class Linf:
    pass


@dataclass(frozen=True)
class SpectralPerMatrix:
    """max over groups of the spectral norm; vector groups count as 1 x n matrices."""


@dataclass(frozen=True)
class GroupPart:
    """One block of a MaxOfGroups norm: named groups, a positive scale, an atomic sub-norm."""

    groups: tuple
    scale: float
    spec: object


@dataclass(frozen=True)
class MaxOfGroups:
    """max_k scale_k * ||p_k||_(k) over a partition of the layout's groups."""

    parts: tuple

    def __post_init__(self):
        for part in self.parts:
            if isinstance(part.spec, MaxOfGroups):
                raise LayoutError("MaxOfGroups parts must use atomic sub-norms")
            if not part.scale > 0:
                raise LayoutError("MaxOfGroups scales must be positive")


def _check_partition(spec, layout):
    seen = []
    for part in spec.parts:
        seen.extend(part.groups)
    if sorted(seen) != sorted(layout.names):
        raise LayoutError(
            f"MaxOfGroups parts {sorted(seen)} do not partition layout groups "
            f"{sorted(layout.names)}"
        )


def _group_as_matrix(pv, name):
    g = pv.layout.group(name)
    block = pv.view(name)
    return block if g.kind == "matrix" else block.reshape(1, -1)


def _sub_vector(pv, names):
    layout = Layout([(n, pv.layout.group(n).kind, pv.layout.group(n).shape) for n in names])
    data = np.concatenate([pv.view(n).ravel() for n in names])
    return ParamVector(data, layout)


def norm(spec, pv):
    """Value of the norm described by ``spec`` at ``pv``."""
    x = pv.data
    if isinstance(spec, L1):
        return float(np.sum(np.abs(x)))
    if isinstance(spec, L2):
        return float(np.linalg.norm(x))
    if isinstance(spec, Linf):
        return float(np.max(np.abs(x))) if x.size else 0.0
    if isinstance(spec, SpectralPerMatrix):
        return max(linalg.spectral_norm(_group_as_matrix(pv, n)) for n in pv.layout.names)
    if isinstance(spec, MaxOfGroups):
        _check_partition(spec, pv.layout)
        return max(part.scale * norm(part.spec, _sub_vector(pv, part.groups)) for part in spec.parts)
    raise TypeError(f"unknown norm spec {spec!r}")


def dual_norm(spec, pv):
    """Value of the dual norm at ``pv`` (L2<->L2, L1<->Linf, spectral<->nuclear)."""
    x = pv.data
    if isinstance(spec, L1):
        return float(np.max(np.abs(x))) if x.size else 0.0
    if isinstance(spec, L2):
        return float(np.linalg.norm(x))
    if isinstance(spec, Linf):
        return float(np.sum(np.abs(x)))
    if isinstance(spec, SpectralPerMatrix):
        return float(sum(linalg.nuclear_norm(_group_as_matrix(pv, n)) for n in pv.layout.names))
    if isinstance(spec, MaxOfGroups):
        _check_partition(spec, pv.layout)
        return float(
            sum(
                dual_norm(part.spec, _sub_vector(pv, part.groups)) / part.scale
                for part in spec.parts
            )
        )
    raise TypeError(f"unknown norm spec {spec!r}")


def _direction_data(spec, pv):
    """Unit-ball minimizer of <u, g>, written into a fresh flat array.

    Blocks whose gradient is identically zero get a zero direction; the caller
    guarantees the overall vector is nonzero, which keeps the result on the
    unit sphere and attaining -dual_norm.
    """
    g = pv.data
    if isinstance(spec, L2):
        # two-pass normalization: pre-scaling by the max entry keeps the sum of
        # squares away from under/overflow for extreme magnitudes
        scaled = g / np.max(np.abs(g))
        return -scaled / np.linalg.norm(scaled)
    if isinstance(spec, Linf):
        return -np.sign(g)
    if isinstance(spec, L1):
        j = int(np.argmax(np.abs(g)))
        out = np.zeros_like(g)
        out[j] = -np.sign(g[j])
        return out
    if isinstance(spec, SpectralPerMatrix):
        out = np.zeros_like(g)
        opv = ParamVector(out, pv.layout)
        for name in pv.layout.names:
            block = _group_as_matrix(pv, name)
            if not np.any(block):
                continue
            q = linalg.orthogonalize(block)
            opv.view(name)[...] = -q.reshape(pv.layout.group(name).shape)
        return out
    if isinstance(spec, MaxOfGroups):
        _check_partition(spec, pv.layout)
        out = np.zeros_like(g)
        opv = ParamVector(out, pv.layout)
        for part in spec.parts:
            sub = _sub_vector(pv, part.groups)
            if not np.any(sub.data):
                continue
            sub_dir = _direction_data(part.spec, sub)
            sub_dir /= part.scale
            sub_pv = ParamVector(sub_dir, sub.layout)
            for name in part.groups:
                opv.view(name)[...] = sub_pv.view(name)
        return out
    raise TypeError(f"unknown norm spec {spec!r}")


def steepest_direction(spec, pv):
    """argmin of <u, g> over the unit ball of ``spec``; requires g != 0."""
    if not np.any(pv.data):
        raise DegenerateGradientError("steepest direction undefined for the zero vector")
    return ParamVector(_direction_data(spec, pv), pv.layout)
