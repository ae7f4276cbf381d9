"""Flat parameter storage with a named group layout.

Parameters live in one contiguous float64 array so optimizers can treat them
as a single vector; the layout tags ordered groups as matrices or plain
vectors so composite optimizers and matrix-aware norms can address subspaces.
"""

from dataclasses import dataclass

import numpy as np


class LayoutError(ValueError):
    """Raised on group-name or shape mismatches against a layout."""


@dataclass(frozen=True)
class Group:
    name: str
    kind: str  # "matrix" or "vector"
    shape: tuple
    offset: int

    @property
    def size(self):
        return int(np.prod(self.shape))


class Layout:
    """Immutable ordered group layout over a flat array."""

    def __init__(self, groups):
        """``groups`` is an iterable of (name, kind, shape) triples."""
        built = []
        offset = 0
        names = set()
        for name, kind, shape in groups:
            if kind not in ("matrix", "vector"):
                raise LayoutError(f"unknown group kind {kind!r}")
            shape = tuple(int(s) for s in shape)
            if kind == "matrix" and len(shape) != 2:
                raise LayoutError(f"matrix group {name!r} needs a (rows, cols) shape")
            if kind == "vector" and len(shape) != 1:
                raise LayoutError(f"vector group {name!r} needs a (len,) shape")
            if name in names:
                raise LayoutError(f"duplicate group name {name!r}")
            names.add(name)
            built.append(Group(name, kind, shape, offset))
            offset += int(np.prod(shape))
        if not built:
            raise LayoutError("layout needs at least one group")
        self.groups = tuple(built)
        self.size = offset
        self._by_name = {g.name: g for g in built}

    def group(self, name):
        try:
            return self._by_name[name]
        except KeyError:
            raise LayoutError(f"no group named {name!r}") from None

    @property
    def names(self):
        return tuple(g.name for g in self.groups)

    def matrix_names(self):
        return tuple(g.name for g in self.groups if g.kind == "matrix")

    def vector_names(self):
        return tuple(g.name for g in self.groups if g.kind == "vector")

    def view(self, flat, name):
        """Reshaped no-copy view of one group inside ``flat``."""
        g = self.group(name)
        return flat[g.offset : g.offset + g.size].reshape(g.shape)

    def __eq__(self, other):
        return isinstance(other, Layout) and self.groups == other.groups

    def __hash__(self):
        return hash(self.groups)

    def __repr__(self):
        parts = ", ".join(f"{g.name}:{g.kind}{g.shape}" for g in self.groups)
        return f"Layout({parts})"


class ParamVector:
    """Flat float64 parameter array plus its group layout."""

    __slots__ = ("data", "layout")

    def __init__(self, data, layout):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 1 or data.size != layout.size:
            raise LayoutError(
                f"data of size {data.size} does not match layout size {layout.size}"
            )
        self.data = data
        self.layout = layout

    @classmethod
    def zeros(cls, layout):
        return cls(np.zeros(layout.size), layout)

    def view(self, name):
        return self.layout.view(self.data, name)

    def copy(self):
        return ParamVector(self.data.copy(), self.layout)

    def __len__(self):
        return self.data.size

    def __repr__(self):
        return f"ParamVector(size={self.data.size}, layout={self.layout!r})"


def check_same_layout(a, b):
    if a.layout != b.layout:
        raise LayoutError("parameter vectors have different layouts")
