import math

import numpy as np
import pytest

from ibnls.discretization import (
    CartesianGrid, Field, RadialGrid, biharmonic_apply, dumps, energy, fractional_laplacian_apply,
    functional, grid_refinement_estimate, hdot_norm, load, loads, lpb_integral, mass, rescale_field,
    save, weinstein,
)
from ibnls.discretization.functionals import laplacian_l2_sq, potential
from ibnls.errors import DomainError, GridError
from ibnls.params import ModelParams


def bilaplacian_gaussian(r, N):
    # closed form of Δ² e^{-r²} for radial functions in ℝ^N
    return (16 * r**4 - 16 * (N + 2) * r**2 + 4 * N * (N + 2)) * np.exp(-r * r)


# ---------------------------------------------------------------- grids

def test_cartesian_grid_never_samples_origin():
    g = CartesianGrid(3, 16, 4.0)
    assert np.min(g.radius) > 0
    assert np.allclose(g.axis[:2], [-4.0 + 0.25, -4.0 + 0.75])


@pytest.mark.parametrize("args", [(4, 16, 1.0), (2, 12, 1.0), (1, 16, 0.0)])
def test_cartesian_grid_rejects(args):
    with pytest.raises(GridError):
        CartesianGrid(*args)


def test_radial_grid_invariants():
    g = RadialGrid(5, 64, 0.1)
    assert np.all(g.r > 0)
    assert g.scheme == "fd2"
    assert RadialGrid(3, 64, 0.1).scheme == "spectral"
    with pytest.raises(GridError):
        RadialGrid(5, 64, 0.1, scheme="spectral")
    # quadrature weights integrate r^{N-1} on the unit sphere area
    fine = RadialGrid.from_extent(5, 4000, 1.0)
    vol = np.sum(fine.weights)
    assert vol == pytest.approx(8 * math.pi**2 / 15, rel=1e-6)  # |B_1| in ℝ^5


# ---------------------------------------------------------------- operators

@pytest.mark.parametrize("dim", [1, 2, 3])
def test_plane_wave_eigenfunction(dim):
    L, n = 3.0, 16
    g = CartesianGrid(dim, n, L)
    m = np.array([2, -1, 3][:dim])
    k = 2 * np.pi * m / (2 * L)
    X = g.coords
    phase = sum(k[i] * X[i] for i in range(dim))
    u = Field(g, np.exp(1j * phase))
    k2 = float(np.sum(k**2))
    out = biharmonic_apply(u).values
    assert np.max(np.abs(out - k2**2 * u.values)) <= 1e-10 * k2**2
    out2 = fractional_laplacian_apply(u, 2).values
    assert np.max(np.abs(out2 - k2 * u.values)) <= 1e-10 * k2
    assert np.allclose(fractional_laplacian_apply(u, 0).values, u.values, atol=1e-13)
    assert np.allclose(fractional_laplacian_apply(u, 4).values, out, rtol=0, atol=1e-10 * k2**2)


def test_zero_field_maps_to_zero():
    g = RadialGrid.from_extent(5, 128, 10.0)
    u = Field(g, np.zeros(128))
    assert not np.any(biharmonic_apply(u).values)


def test_negative_fractional_power_rejected():
    g = CartesianGrid(1, 16, 1.0)
    with pytest.raises(ValueError):
        fractional_laplacian_apply(Field(g, np.ones(16)), -1)


def test_radial_biharmonic_n5_against_closed_form():
    g = RadialGrid.from_extent(5, 2048, 12.0)
    u = Field.radial_function(g, lambda r: np.exp(-r * r))
    exact = Field(g, bilaplacian_gaussian(g.r, 5))
    err = Field(g, biharmonic_apply(u).values - exact.values)
    assert math.sqrt(mass(err) / mass(exact)) <= 1e-4


def test_radial_biharmonic_second_order():
    ref = None

    def err(M):
        g = RadialGrid.from_extent(5, M, 12.0)
        u = Field.radial_function(g, lambda r: np.exp(-r * r))
        e = Field(g, biharmonic_apply(u).values - bilaplacian_gaussian(g.r, 5))
        return math.sqrt(mass(e))

    res = grid_refinement_estimate(err, 256, reference=0.0)
    assert res.status == "converging"
    assert res.order >= 1.9


def test_spectral_radial_fractional_matches_dense_fd2_trend():
    # spectral N=3 Laplacian of e^{-r²} is exact to spectral accuracy
    g = RadialGrid.from_extent(3, 512, 12.0)
    u = Field.radial_function(g, lambda r: np.exp(-r * r))
    lap = fractional_laplacian_apply(u, 2).values
    assert np.max(np.abs(lap - (6 - 4 * g.r**2) * np.exp(-g.r**2))) < 1e-10


# ---------------------------------------------------------------- functionals

def test_gaussian_oracles_1d():
    g = CartesianGrid(1, 256, 10.0)
    u = Field(g, np.exp(-g.axis**2))
    assert mass(u) == pytest.approx(math.sqrt(math.pi / 2), abs=1e-8)
    assert hdot_norm(u, 2) ** 2 == pytest.approx(3 * math.sqrt(math.pi / 2), abs=1e-6)


def test_weighted_integral_3d():
    g = RadialGrid.from_extent(3, 1024, 10.0)
    u = Field.radial_function(g, lambda r: np.exp(-r * r))
    assert lpb_integral(u, 2, 1) == pytest.approx(math.pi, abs=1e-6)


def test_weighted_integral_needs_b_below_n():
    g = RadialGrid.from_extent(1, 64, 5.0)
    with pytest.raises(DomainError):
        lpb_integral(Field(g, np.ones(64)), 2, 1)


def test_parseval_cartesian(rng):
    g = CartesianGrid(2, 32, 5.0)
    v = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    u = Field(g, v)
    assert hdot_norm(u, 0) ** 2 == pytest.approx(mass(u), rel=1e-10)


def test_spectral_cache_matches_forward(rng):
    g = CartesianGrid(1, 64, 3.0)
    u = Field(g, rng.standard_normal(64))
    assert np.allclose(u.spectral, g.forward(u.values), rtol=0, atol=1e-12)


def test_energy_paths_agree():
    P = ModelParams(3, 1, "1/2")
    g = RadialGrid.from_extent(3, 512, 12.0)
    u = Field.radial_function(g, lambda r: 0.7 * np.exp(-r * r))
    E = energy(u, P)
    kin = hdot_norm(u, 2) ** 2
    pot = lpb_integral(u, 4, 0.5) / 4
    assert E == pytest.approx(0.5 * kin - pot, rel=1e-12)
    assert laplacian_l2_sq(u) == pytest.approx(kin, rel=1e-12)
    assert potential(u, P) == pytest.approx(pot, rel=1e-15)


def test_functional_dispatch():
    P = ModelParams(3, 1, "1/2", p=2)
    g = RadialGrid.from_extent(3, 256, 10.0)
    u = Field.radial_function(g, lambda r: np.exp(-r * r))
    assert functional(u, "mass").value == pytest.approx(mass(u))
    assert functional(u, "lp", P, p=2).value == pytest.approx(math.sqrt(mass(u)))
    assert functional(u, "hdot", s=0).value == pytest.approx(math.sqrt(mass(u)), rel=1e-10)
    assert functional(u, "weinstein", P).value == pytest.approx(weinstein(u, P))
    with pytest.raises(ValueError):
        functional(u, "bogus")
    with pytest.raises(ValueError):
        weinstein(Field(g, np.zeros(256)), P)


def test_weinstein_homogeneous_and_dilation_invariant():
    P = ModelParams(3, 1, "1/2", p=2)
    g = RadialGrid.from_extent(3, 1024, 20.0)
    u = Field.radial_function(g, lambda r: np.exp(-r * r) * (1 + 0.3 * r * r))
    J = weinstein(u, P)
    assert weinstein(u * -2.5, P) == pytest.approx(J, rel=1e-10)
    # u(x) -> μ u(θx) is exact on the relabelled grid
    assert weinstein(u.relabel(3.0, 1.7), P) == pytest.approx(J, rel=1e-6)
    # and close on the same grid through interpolation
    v = rescale_field(u, 1.3, P)
    assert weinstein(v, P) == pytest.approx(J, rel=1e-6)


# ---------------------------------------------------------------- scaling

@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_scaling_law_n5(lam):
    P = ModelParams(5, 1, 1)  # s_c = 1
    # the N = 5 grid is second order; 4096 nodes keep the Ḣ² error near 5e-5
    g = RadialGrid.from_extent(5, 4096, 30.0)
    u = Field.radial_function(g, lambda r: np.exp(-(r / 1.5) ** 2))
    v = rescale_field(u, lam, P)
    for s in (0, 1, 2):
        assert hdot_norm(v, s) == pytest.approx(lam ** (s - 1) * hdot_norm(u, s), rel=1e-4)


def test_rescale_identity_and_errors():
    P = ModelParams(3, 1, "1/2")
    g = RadialGrid.from_extent(3, 128, 6.0)
    u = Field.radial_function(g, lambda r: np.exp(-r * r))
    assert np.array_equal(rescale_field(u, 1.0, P).values, u.values)
    with pytest.raises(GridError):
        rescale_field(u, 0.1, P)  # profile would be ten times wider than the box
    with pytest.raises(ValueError):
        rescale_field(u, -1.0, P)


# ---------------------------------------------------------------- refinement

def test_refinement_machine_limited_spectral_mass():
    def m(n):
        g = CartesianGrid(1, n, 10.0)
        return mass(Field(g, np.exp(-g.axis**2)))

    res = grid_refinement_estimate(m, 128, reference=math.sqrt(math.pi / 2))
    assert res.status == "machine-limited"
    assert res.order is None


def test_refinement_weighted_norm_order():
    def w(M):
        g = RadialGrid.from_extent(3, M, 10.0, singular="midpoint")
        return lpb_integral(Field.radial_function(g, lambda r: np.exp(-r * r)), 2, 1)

    res = grid_refinement_estimate(w, 128, reference=math.pi)
    assert res.order >= 0.9


# ---------------------------------------------------------------- dump format

@pytest.mark.parametrize("grid", [CartesianGrid(2, 8, 2.0), RadialGrid(3, 16, 0.25),
                                  RadialGrid(4, 16, 0.25)])
def test_field_dump_roundtrip(tmp_path, grid, rng):
    v = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    u = Field(grid, v)
    buf = dumps(u)
    assert buf[:8] == b"IBNLSFLD"
    w = loads(buf)
    assert w.grid == grid
    assert np.array_equal(w.values, u.values)
    save(u, tmp_path / "f.fld")
    assert np.array_equal(load(tmp_path / "f.fld").values, u.values)


def test_field_dump_rejects_garbage():
    with pytest.raises(ValueError):
        loads(b"NOTAFIELD" + bytes(32))
