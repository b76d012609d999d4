"""Linear operators and the scaling action on fields."""
from __future__ import annotations

import numpy as np

from ..errors import GridError
from ..params import ModelParams
from .field import Field


def biharmonic_apply(u: Field) -> Field:
    return Field(u.grid, u.grid.biharmonic(u.values))


def laplacian_apply(u: Field) -> Field:
    return Field(u.grid, u.grid.laplacian(u.values))


def fractional_laplacian_apply(u: Field, s: float) -> Field:
    """D^s u = (-Δ)^{s/2} u."""
    if s < 0:
        raise ValueError("s must be >= 0")
    return Field(u.grid, u.grid.fractional(u.values, s))


def rescale_field(u: Field, lam: float, params: ModelParams, tol: float = 1e-6) -> Field:
    """u_λ(x) = λ^{(4-b)/(2σ)} u(λx) on the same grid.

    Cartesian grids interpolate with the band-limited trigonometric kernel,
    radial grids with their own interpolant (eigenfunction series or cubic
    spline).  Raises GridError if the dilated profile does not decay to
    ``tol`` (relative to its maximum) at the edge of the grid.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    amp = lam ** ((4 - float(params.b)) / (2 * float(params.sigma)))
    if lam == 1:
        return Field(u.grid, amp * np.array(u.values))
    vals = amp * u.grid.dilate_values(u.values, lam)
    peak = np.max(np.abs(vals)) if vals.size else 0.0
    if peak > 0:
        edge = np.max(np.abs(vals[u.grid.boundary_mask()]))
        if lam < 1 and edge > tol * peak:
            raise GridError(
                f"dilation by {lam} pushes the profile past the grid edge "
                f"(edge/peak = {edge / peak:.2e})")
    return Field(u.grid, vals)
