from __future__ import annotations

import functools

import numpy as np


class Field:
    """Samples of a function on a grid, with a lazily cached transform.

    Fields are treated as immutable: operations return new fields.
    """

    __slots__ = ("grid", "values", "__dict__")

    def __init__(self, grid, values):
        values = np.asarray(values)
        if values.shape != tuple(grid.shape):
            raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
        if not (np.issubdtype(values.dtype, np.floating) or np.issubdtype(values.dtype, np.complexfloating)):
            values = values.astype(float)
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    def __repr__(self):
        return f"Field({self.grid!r}, dtype={self.values.dtype})"

    @functools.cached_property
    def spectral(self):
        c = self.grid.forward(self.values)
        c.setflags(write=False)
        return c

    @property
    def is_real(self) -> bool:
        return np.isrealobj(self.values)

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def __mul__(self, c):
        return Field(self.grid, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other):
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __neg__(self):
        return Field(self.grid, -self.values)

    def relabel(self, mu: float, theta: float) -> "Field":
        """The field x -> mu * u(theta x), represented exactly on a rescaled grid.

        The sample at x_j/theta of the new field is mu*u(x_j), so the new grid
        is the old one with every length divided by theta.  No interpolation
        is involved.
        """
        return Field(self.grid.scaled(1.0 / theta), mu * self.values)

    def astype(self, dtype) -> "Field":
        return Field(self.grid, self.values.astype(dtype))

    @classmethod
    def from_function(cls, grid, func):
        """Sample ``func`` at the grid points: ``func(r)`` on radial grids, ``func(*coords)`` otherwise."""
        if grid.kind == "radial":
            return cls(grid, func(grid.r))
        return cls(grid, func(*grid.coords))

    @classmethod
    def radial_function(cls, grid, func):
        """Sample a radial profile ``func(|x|)`` on any grid."""
        return cls(grid, func(grid.radius))


def _same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
