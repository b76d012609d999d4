"""Sample grids and their spectral backends.

Both grid families expose the same small interface:

* ``weights``: quadrature weights for the integral over R^N,
* ``singular_weights(b)``: weights for the integral against |x|^{-b},
* ``forward`` / ``inverse``: a transform that is orthonormal for the
  weighted inner product, so ``sum(|forward(u)|**2) == sum(weights*|u|**2)``,
* ``symbol``: eigenvalues of -Δ matching the layout of ``forward``.

Every operator is a function of ``symbol`` in the transformed variables, so
the Laplacian, Δ², D^s and the linear propagator share one code path.
"""
from __future__ import annotations

import functools
import hashlib
import math

import mpmath
import numpy as np
import scipy.fft as sfft
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.special import gamma

from ..errors import GridError


def sphere_area(N: int) -> float:
    """Area of the unit sphere in R^N (2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2) / gamma(N / 2)


class Grid:
    kind = "abstract"
    dim: int

    # subclasses provide: shape, weights, radius, symbol, forward, inverse,
    # singular_weights, scaled, dilate_values, describe

    def apply_symbol(self, values, mult):
        out = self.inverse(mult * self.forward(values))
        if np.isrealobj(values) and np.isrealobj(mult):
            out = out.real
        return out

    def laplacian(self, values):
        return self.apply_symbol(values, -self.symbol)

    def biharmonic(self, values):
        return self.apply_symbol(values, self.symbol ** 2)

    def fractional(self, values, s):
        """D^s = (-Δ)^{s/2}, spectral function of the (discrete) Laplacian."""
        if s < 0:
            raise ValueError("fractional power must be >= 0")
        if s == 0:
            return np.array(values, copy=True)
        return self.apply_symbol(values, self.symbol ** (0.5 * s))

    def inner(self, f, g) -> complex:
        return np.sum(self.weights * f * np.conj(g))

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(repr(sorted(self.describe().items())).encode())
        h.update(np.ascontiguousarray(self.weights, dtype="<f8").tobytes())
        return h.hexdigest()

    def effective_weight(self, b):
        """Pointwise |x|^{-b} as seen by the quadrature (singular_weights/weights)."""
        cache = self.__dict__.setdefault("_rho_cache", {})
        key = float(b)
        if key not in cache:
            cache[key] = self.singular_weights(b) / self.weights
        return cache[key]


class CartesianGrid(Grid):
    """Periodic box [-L, L]^dim with n points per axis, offset by half a cell."""

    kind = "cartesian"

    def __init__(self, dim: int, n: int, L: float):
        if dim not in (1, 2, 3):
            raise GridError("Cartesian grids support dim 1, 2 or 3")
        if n < 2 or n & (n - 1):
            raise GridError("points per axis must be a power of two")
        if not L > 0:
            raise GridError("half width must be positive")
        self.dim = int(dim)
        self.n = int(n)
        self.L = float(L)
        self.h = 2.0 * self.L / self.n
        self.axis = -self.L + (np.arange(self.n) + 0.5) * self.h
        self.freq = 2.0 * np.pi * sfft.fftfreq(self.n, d=self.h)

    def __repr__(self):
        return f"CartesianGrid(dim={self.dim}, n={self.n}, L={self.L!r})"

    def __eq__(self, other):
        return isinstance(other, CartesianGrid) and (self.dim, self.n, self.L) == (
            other.dim, other.n, other.L)

    def __hash__(self):
        return hash((self.kind, self.dim, self.n, self.L))

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def extent(self):
        return self.L

    @functools.cached_property
    def coords(self):
        return np.meshgrid(*([self.axis] * self.dim), indexing="ij")

    @functools.cached_property
    def radius(self):
        return np.sqrt(sum(x * x for x in self.coords))

    @functools.cached_property
    def weights(self):
        return np.full(self.shape, self.h ** self.dim)

    @functools.cached_property
    def symbol(self):
        ks = np.meshgrid(*([self.freq] * self.dim), indexing="ij")
        return sum(k * k for k in ks)

    def singular_weights(self, b):
        # midpoint rule; samples never sit at the origin
        return self.weights * self.radius ** (-float(b))

    def forward(self, values):
        return sfft.fftn(values, norm="ortho") * self.h ** (self.dim / 2)

    def inverse(self, coeffs):
        return sfft.ifftn(coeffs, norm="ortho") / self.h ** (self.dim / 2)

    def scaled(self, factor: float) -> "CartesianGrid":
        return CartesianGrid(self.dim, self.n, self.L * factor)

    def boundary_mask(self):
        m = np.zeros(self.shape, dtype=bool)
        for ax in range(self.dim):
            idx = [slice(None)] * self.dim
            idx[ax] = 0
            m[tuple(idx)] = True
            idx[ax] = -1
            m[tuple(idx)] = True
        return m

    def _interp_matrix(self, points):
        """Symmetric trigonometric interpolation from the axis samples to ``points``."""
        d = points[:, None] - self.axis[None, :]
        k = self.freq[: self.n // 2]  # 0 .. n/2-1 (non-negative half)
        # sum over +-k of exp(i k d) = 1 + 2 sum_{k>0} cos(k d); Nyquist enters as cos
        acc = np.ones_like(d)
        for kk in k[1:]:
            acc += 2.0 * np.cos(kk * d)
        kn = np.pi / self.h
        acc += np.cos(kn * d)
        mat = acc / self.n
        mat[np.abs(points) > self.L] = 0.0
        return mat

    def dilate_values(self, values, lam: float):
        """Samples of x -> u(lam x), band-limited interpolation, zero outside the box."""
        mat = self._interp_matrix(lam * self.axis)
        out = np.asarray(values)
        for ax in range(self.dim):
            out = np.moveaxis(np.tensordot(mat, out, axes=([1], [ax])), 0, ax)
        return out

    def describe(self):
        return {"kind": self.kind, "dim": self.dim, "n": self.n, "L": self.L}


# ---------------------------------------------------------------------------
# radial grids


@functools.lru_cache(maxsize=None)
def _zeta_correction(N: int, b: float, m: int = 3):
    """Endpoint corrections for the midpoint rule on r^{N-1-b} g(r^2).

    The midpoint sum of r^gamma r^{2i} over (j+1/2)h differs from the integral
    by -zeta(-gamma-2i, 1/2) h^{gamma+2i+1} (Navot).  Correcting the first m
    cells removes these terms for i < m, which makes the singular quadrature
    exact up to O(h^{gamma+2m+1}) on smooth radial integrands.  Returns d with
    correction weights d_j * h^{N-b}.
    """
    g = N - 1 - b
    rr = np.arange(m) + 0.5
    A = np.array([rr ** (2 * i) for i in range(m)])
    rhs = np.array([-float(mpmath.zeta(-g - 2 * i, 0.5)) for i in range(m)])
    return np.linalg.solve(A, rhs)


@functools.lru_cache(maxsize=4)
def _fd2_unit(N: int, M: int):
    """Tridiagonal symmetric form of the radial Laplacian at unit spacing.

    Face coefficients kappa_{j+1/2} = N sum_{i<=j} r_i^{N-1} / r_{j+1/2} make the
    flux exact on r^2 (so the stencil is second order up to the origin), and
    the last cell uses an odd ghost value (Dirichlet at r = M).
    Returns (kappa, diag, off, eigenvalues of -L, eigenvectors of S) where
    S = W^{-1/2} A W^{-1/2} is the symmetrised operator.
    """
    r = np.arange(M) + 0.5
    rf = np.arange(M) + 1.0
    w = r ** (N - 1)
    kap = N * np.cumsum(w) / rf
    diag = -kap.copy()
    diag[1:] -= kap[:-1]
    diag[-1] -= kap[-1]
    off = kap[:-1]
    sw = np.sqrt(w)
    sd = diag / w
    so = off / (sw[:-1] * sw[1:])
    lam, vec = eigh_tridiagonal(-sd, -so)
    lam = np.clip(lam, 0.0, None)
    return kap, diag, off, lam, vec


class RadialGrid(Grid):
    """Cell-centred radial grid r_j = (j + 1/2) dr, j < M, Dirichlet at R = M dr.

    ``scheme``:
      * ``"spectral"`` (N = 1 or 3): exact radial eigenfunctions, transforms
        through DCT-IV (N = 1) or DST-II (N = 3);
      * ``"fd2"``: second-order conservative three-point Laplacian with a dense
        eigendecomposition cached per (N, M).
    ``singular``: ``"zeta"`` (default) corrects the first three cells of the
    |x|^{-b} quadrature, ``"midpoint"`` uses plain samples of r^{-b}.
    """

    kind = "radial"

    def __init__(self, N: int, M: int, dr: float, scheme: str = "auto", singular: str = "zeta"):
        if N < 1:
            raise GridError("dimension must be >= 1")
        if M < 2:
            raise GridError("need at least two radial nodes")
        if not dr > 0:
            raise GridError("dr must be positive")
        if scheme == "auto":
            scheme = "spectral" if N in (1, 3) else "fd2"
        if scheme not in ("spectral", "fd2"):
            raise GridError(f"unknown radial scheme {scheme!r}")
        if scheme == "spectral" and N not in (1, 3):
            raise GridError("spectral radial scheme is available for N = 1 and N = 3")
        if singular not in ("zeta", "midpoint"):
            raise GridError(f"unknown singular quadrature {singular!r}")
        self.dim = int(N)
        self.M = int(M)
        self.dr = float(dr)
        self.scheme = scheme
        self.singular = singular
        self.omega = sphere_area(self.dim)
        self.r = (np.arange(self.M) + 0.5) * self.dr

    @classmethod
    def from_extent(cls, N, M, R, **kw):
        return cls(N, M, R / M, **kw)

    def __repr__(self):
        return (f"RadialGrid(N={self.dim}, M={self.M}, dr={self.dr!r}, "
                f"scheme={self.scheme!r})")

    def __eq__(self, other):
        return isinstance(other, RadialGrid) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def _key(self):
        return (self.kind, self.dim, self.M, self.dr, self.scheme, self.singular)

    @property
    def shape(self):
        return (self.M,)

    @property
    def extent(self):
        return self.M * self.dr

    @property
    def h(self):
        return self.dr

    @property
    def radius(self):
        return self.r

    @functools.cached_property
    def weights(self):
        return self.omega * self.r ** (self.dim - 1) * self.dr

    @functools.cached_property
    def _sqrt_w(self):
        return np.sqrt(self.weights)

    def singular_weights(self, b):
        b = float(b)
        if b >= self.dim:
            raise GridError("|x|^{-b} is not locally integrable for b >= N")
        w = self.omega * self.r ** (self.dim - 1 - b) * self.dr
        if self.singular == "zeta" and b != 0:
            d = _zeta_correction(self.dim, b)[: self.M]
            corr = w.copy()
            corr[: d.size] += self.omega * d * self.dr ** (self.dim - b)
            if np.all(corr > 0):
                w = corr
        return w

    @functools.cached_property
    def symbol(self):
        M, R = self.M, self.extent
        if self.scheme == "spectral":
            k = np.arange(M) + (0.5 if self.dim == 1 else 1.0)
            return (k * np.pi / R) ** 2
        return _fd2_unit(self.dim, M)[3] / self.dr ** 2

    def forward(self, values):
        y = self._sqrt_w * values
        if self.scheme == "spectral":
            if self.dim == 1:
                return sfft.dct(y, type=4, norm="ortho")
            return sfft.dst(y, type=2, norm="ortho")
        vec = _fd2_unit(self.dim, self.M)[4]
        return vec.T @ y

    def inverse(self, coeffs):
        if self.scheme == "spectral":
            if self.dim == 1:
                y = sfft.idct(coeffs, type=4, norm="ortho")
            else:
                y = sfft.idst(coeffs, type=2, norm="ortho")
        else:
            y = _fd2_unit(self.dim, self.M)[4] @ coeffs
        return y / self._sqrt_w

    def laplacian(self, values):
        if self.scheme == "spectral":
            return super().laplacian(values)
        return self._fd_laplacian(values)

    def biharmonic(self, values):
        if self.M < 5:
            raise GridError("radial biharmonic needs M >= 5")
        if self.scheme == "spectral":
            return super().biharmonic(values)
        return self._fd_laplacian(self._fd_laplacian(values))

    def _fd_laplacian(self, f):
        kap, diag, off, _, _ = _fd2_unit(self.dim, self.M)
        af = diag * f
        af[:-1] += off * f[1:]
        af[1:] += off * f[:-1]
        return af / ((np.arange(self.M) + 0.5) ** (self.dim - 1) * self.dr ** 2)

    def scaled(self, factor: float) -> "RadialGrid":
        return RadialGrid(self.dim, self.M, self.dr * factor, self.scheme, self.singular)

    def boundary_mask(self):
        m = np.zeros(self.M, dtype=bool)
        m[-1] = True
        return m

    def interpolate(self, values, points):
        """Evaluate the grid function at radii ``points`` (zero beyond the wall).

        Spectral grids use the band-limited eigenfunction expansion; fd2 grids
        use an even-extended cubic spline through (R, 0).
        """
        points = np.asarray(points, dtype=float)
        R = self.extent
        out_dtype = np.result_type(values, float)
        out = np.zeros(points.shape, dtype=out_dtype)
        inside = points < R
        pts = points[inside]
        if self.scheme == "spectral":
            c = self.forward(values)
            M = self.M
            if self.dim == 1:
                k = np.arange(M) + 0.5
                basis = np.sqrt(2.0 / M) * np.cos(np.pi * np.outer(pts, k) / R)
                y = basis @ c
                out[inside] = y / np.sqrt(self.omega * self.dr)
            else:
                k = np.arange(M) + 1.0
                scale = np.full(M, np.sqrt(2.0 / M))
                scale[-1] = np.sqrt(1.0 / M)
                basis = np.sin(np.pi * np.outer(pts, k) / R) * scale
                y = basis @ c
                out[inside] = y / (pts * np.sqrt(self.omega * self.dr))
        else:
            nm = min(4, self.M)
            xs = np.concatenate([-self.r[:nm][::-1], self.r, [R]])
            ys = np.concatenate([values[:nm][::-1], values, [0.0]])
            out[inside] = CubicSpline(xs, ys)(pts)
        return out

    def dilate_values(self, values, lam: float):
        return self.interpolate(values, lam * self.r)

    def describe(self):
        return {"kind": self.kind, "dim": self.dim, "M": self.M, "dr": self.dr,
                "scheme": self.scheme, "singular": self.singular}
