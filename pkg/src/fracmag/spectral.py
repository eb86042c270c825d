"""Fourier kernel layer on the periodic box [0, 2*pi]^d.

Coefficients follow the unitary-in-the-continuum convention

    f_hat(k) = (2 pi)^(-d/2) * integral over T^d of f(x) exp(-i k.x) dx,

so that Parseval reads ||f||_{L^2}^2 = sum_k |f_hat(k)|^2.  Real fields are
stored in the half-spectrum layout produced by ``rfftn`` (the last axis keeps
wavenumbers 0..n/2); the full spectrum is recovered on demand through
Hermitian symmetry.  Physical axis ``j`` carries the coordinate x_{j+1}.

Two wavenumber arrays are kept on every grid:

* the integer lattice ``lattice`` with the Nyquist entry at -n/2 (n/2 on the
  halved axis), used for |k| in the fractional multipliers, and
* ``kvec``, the same lattice with Nyquist entries set to zero, used for odd
  derivatives, divergence and the Leray projection so that these operators
  map real fields to real fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

from .errors import (
    DimensionMismatch,
    GridMismatch,
    NegativeOrderOnNonzeroMean,
    NonzeroMean,
)

TWO_PI = 2.0 * np.pi

# Relative size below which a zero mode counts as "zero mean".
MEAN_TOL = 1e-12
DIV_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n`` points per axis on T^d."""

    d: int
    n: int

    def __post_init__(self):
        if self.d not in (2, 3):
            raise DimensionMismatch(f"d must be 2 or 3, got {self.d}")
        if self.n < 8 or self.n % 2:
            raise DimensionMismatch(f"n must be even and >= 8, got {self.n}")

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(-self.d, 0))

    @property
    def physical_shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def spectral_shape(self) -> tuple[int, ...]:
        return (self.n,) * (self.d - 1) + (self.n // 2 + 1,)

    @property
    def dx(self) -> float:
        return TWO_PI / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    @property
    def dealias_cutoff(self) -> int:
        return self.n // 3

    @cached_property
    def lattice(self) -> np.ndarray:
        n = self.n
        full = np.fft.fftfreq(n, 1.0 / n)
        half = np.fft.rfftfreq(n, 1.0 / n)
        axes_k = [full] * (self.d - 1) + [half]
        return np.stack(np.meshgrid(*axes_k, indexing="ij"))

    @cached_property
    def kvec(self) -> np.ndarray:
        k = self.lattice.copy()
        k[np.abs(k) == self.n // 2] = 0.0
        return k

    @cached_property
    def kmag2(self) -> np.ndarray:
        return np.sum(self.lattice**2, axis=0)

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.kmag2)

    @cached_property
    def kvec2(self) -> np.ndarray:
        return np.sum(self.kvec**2, axis=0)

    @cached_property
    def inv_kvec2(self) -> np.ndarray:
        out = np.zeros_like(self.kvec2)
        nz = self.kvec2 > 0
        out[nz] = 1.0 / self.kvec2[nz]
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        keep = np.all(np.abs(self.lattice) <= self.dealias_cutoff, axis=0)
        return keep.astype(float)

    @cached_property
    def multiplicity(self) -> np.ndarray:
        """Number of full-spectrum modes each half-spectrum entry stands for."""
        w = np.full(self.spectral_shape, 2.0)
        w[..., 0] = 1.0
        w[..., -1] = 1.0
        return w

    def coords(self) -> list[np.ndarray]:
        x = np.arange(self.n) * self.dx
        return np.meshgrid(*([x] * self.d), indexing="ij")

    @cached_property
    def ik_dealiased(self) -> np.ndarray:
        """i k with the dealiasing mask folded in."""
        return 1j * self.kvec * self.dealias_mask

    @cached_property
    def _powers(self) -> dict:
        return {}

    def radial_power(self, gamma: float) -> np.ndarray:
        """|k|^gamma on the lattice with the zero mode set to 0 (cached, read-only)."""
        out = self._powers.get(gamma)
        if out is None:
            out = np.zeros(self.spectral_shape)
            nz = self.kmag2 > 0
            out[nz] = self.kmag[nz] ** gamma
            out.flags.writeable = False
            self._powers[gamma] = out
        return out


def _to_spectral(grid: Grid, values: np.ndarray) -> np.ndarray:
    out = scipy.fft.rfftn(values, axes=grid.axes, norm="forward")
    out *= TWO_PI ** (grid.d / 2)
    return out


def _to_physical(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    out = scipy.fft.irfftn(coeffs, s=grid.physical_shape, axes=grid.axes, norm="forward")
    out *= TWO_PI ** (-grid.d / 2)
    return out


class _Spectral:
    grid: Grid
    coeffs: np.ndarray

    def _new(self, coeffs):
        return type(self)(self.grid, coeffs)

    def _check(self, other):
        if not isinstance(other, _Spectral) or other.grid != self.grid:
            raise GridMismatch("operands live on different grids")
        if other.coeffs.shape != self.coeffs.shape:
            raise GridMismatch("operands have different shapes")

    def __add__(self, other):
        self._check(other)
        return self._new(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return self._new(self.coeffs - other.coeffs)

    def __mul__(self, c):
        return self._new(self.coeffs * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self._new(self.coeffs / c)

    def __neg__(self):
        return self._new(-self.coeffs)

    def copy(self):
        return self._new(self.coeffs.copy())

    def physical(self) -> np.ndarray:
        return _to_physical(self.grid, self.coeffs)

    def mean_mode(self) -> np.ndarray:
        return self.coeffs[(..., *([0] * self.grid.d))]

    def is_zero_mean(self, tol: float = MEAN_TOL) -> bool:
        scale = np.max(np.abs(self.coeffs), initial=0.0)
        return bool(np.all(np.abs(self.mean_mode()) <= tol * scale))

    def full_spectrum(self) -> np.ndarray:
        return full_spectrum(self.grid, self.coeffs)

    def hermitian_defect(self) -> float:
        """Relative size of the non-Hermitian part of the stored planes."""
        scale = np.max(np.abs(self.coeffs), initial=0.0)
        if scale == 0.0:
            return 0.0
        again = _to_spectral(self.grid, self.physical())
        return float(np.max(np.abs(again - self.coeffs)) / scale)


@dataclass(eq=False)
class SpectralScalar(_Spectral):
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != self.grid.spectral_shape:
            raise DimensionMismatch(
                f"scalar coefficients must have shape {self.grid.spectral_shape}, "
                f"got {self.coeffs.shape}"
            )


@dataclass(eq=False)
class SpectralVectorField(_Spectral):
    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != self.grid.d + 1 or self.coeffs.shape[1:] != self.grid.spectral_shape:
            raise DimensionMismatch(
                f"vector coefficients must have shape (m, *{self.grid.spectral_shape}), "
                f"got {self.coeffs.shape}"
            )

    @classmethod
    def zeros(cls, grid: Grid, ncomp: int | None = None) -> "SpectralVectorField":
        m = grid.d if ncomp is None else ncomp
        return cls(grid, np.zeros((m, *grid.spectral_shape), dtype=complex))

    @classmethod
    def from_components(cls, comps) -> "SpectralVectorField":
        comps = list(comps)
        grid = comps[0].grid
        for c in comps:
            if c.grid != grid:
                raise GridMismatch("components live on different grids")
        return cls(grid, np.stack([c.coeffs for c in comps]))

    @classmethod
    def from_physical(cls, grid: Grid, values) -> "SpectralVectorField":
        values = np.asarray(values, dtype=float)
        if values.shape[1:] != grid.physical_shape:
            raise DimensionMismatch(
                f"expected physical shape (m, *{grid.physical_shape}), got {values.shape}"
            )
        return cls(grid, _to_spectral(grid, values))

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    def component(self, i: int) -> SpectralScalar:
        return SpectralScalar(self.grid, self.coeffs[i])

    def divergence_defect(self) -> float:
        """max_k |k . v_hat(k)| / max_k |v_hat(k)| (0 for the zero field)."""
        scale = np.max(np.abs(self.coeffs), initial=0.0)
        if scale == 0.0:
            return 0.0
        kd = np.abs(np.einsum("i...,i...->...", self.grid.kvec[: self.ncomp], self.coeffs))
        return float(np.max(kd) / scale)

    def is_divergence_free(self, tol: float = DIV_TOL) -> bool:
        return self.ncomp == self.grid.d and self.divergence_defect() <= tol


def full_spectrum(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    """Expand half-spectrum coefficients to the full FFT-ordered spectrum."""
    n, d = grid.n, grid.d
    lead = coeffs.shape[: coeffs.ndim - d]
    full = np.empty(lead + (n,) * d, dtype=complex)
    full[..., : n // 2 + 1] = coeffs
    mirrored = coeffs[..., 1 : n // 2][..., ::-1]
    neg = (-np.arange(n)) % n
    for ax in range(d - 1):
        mirrored = np.take(mirrored, neg, axis=coeffs.ndim - d + ax)
    full[..., n // 2 + 1 :] = np.conj(mirrored)
    return full


def half_spectrum(grid: Grid, full: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(full[..., : grid.n // 2 + 1])


def forward_transform(field, grid: Grid) -> SpectralScalar:
    """Fourier coefficients of a real scalar sampled on ``grid``."""
    values = np.asarray(field, dtype=float)
    if values.shape != grid.physical_shape:
        raise DimensionMismatch(f"expected shape {grid.physical_shape}, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("field contains non-finite values")
    return SpectralScalar(grid, _to_spectral(grid, values))


def inverse_transform(f: _Spectral) -> np.ndarray:
    return f.physical()


def fractional_laplacian(f, gamma: float):
    """Apply the multiplier |k|^gamma; negative orders need zero-mean input."""
    grid = f.grid
    if gamma < 0 and not f.is_zero_mean():
        raise NegativeOrderOnNonzeroMean(
            f"Riesz potential of order {-gamma} needs zero-mean input"
        )
    if gamma == 0:
        return f.copy()
    return f._new(f.coeffs * grid.radial_power(gamma))


def leray_project(v: SpectralVectorField) -> SpectralVectorField:
    """Orthogonal projection onto divergence-free fields, I - k k^T / |k|^2."""
    if not v.is_zero_mean():
        raise NonzeroMean("Leray projection is defined on zero-mean fields")
    grid = v.grid
    out = _project(grid, v.coeffs)
    out[(slice(None), *([0] * grid.d))] = 0.0
    return SpectralVectorField(grid, out)


def _project(grid: Grid, c: np.ndarray) -> np.ndarray:
    k = grid.kvec
    kdotc = np.einsum("i...,i...->...", k, c)
    return c - k * (kdotc * grid.inv_kvec2)


def dealias(f):
    """Zero every coefficient with some |k_i| above the two-thirds cutoff."""
    return f._new(f.coeffs * f.grid.dealias_mask)


def divergence(v: SpectralVectorField) -> SpectralScalar:
    return SpectralScalar(v.grid, 1j * np.einsum("i...,i...->...", v.grid.kvec, v.coeffs))


def gradient(f: SpectralScalar) -> SpectralVectorField:
    return SpectralVectorField(f.grid, 1j * f.grid.kvec * f.coeffs)


def curl(v: SpectralVectorField) -> SpectralVectorField:
    if v.grid.d != 3:
        raise DimensionMismatch("curl of a vector field is defined here for d = 3")
    return SpectralVectorField(v.grid, _curl(v.grid, v.coeffs))


def _curl(grid: Grid, c: np.ndarray) -> np.ndarray:
    k = grid.kvec
    return 1j * np.stack(
        [
            k[1] * c[2] - k[2] * c[1],
            k[2] * c[0] - k[0] * c[2],
            k[0] * c[1] - k[1] * c[0],
        ]
    )


def _div_tensor(grid: Grid, a: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Spectral coefficients of Div(a (x) c) from physical components."""
    d = grid.d
    k = grid.kvec
    mask = grid.dealias_mask
    out = np.zeros((c.shape[0], *grid.spectral_shape), dtype=complex)
    for i in range(d):
        for j in range(c.shape[0]):
            out[j] += 1j * k[i] * _to_spectral(grid, a[i] * c[j])
    return out * mask


def _div_sym(grid: Grid, b: np.ndarray) -> np.ndarray:
    """Div(b (x) b) using the symmetry of the tensor."""
    d = grid.d
    ik = grid.ik_dealiased
    pairs = [(i, j) for i in range(d) for j in range(i, d)]
    t = _to_spectral(grid, np.stack([b[i] * b[j] for i, j in pairs]))
    out = np.zeros((d, *grid.spectral_shape), dtype=complex)
    for m, (i, j) in enumerate(pairs):
        out[j] += ik[i] * t[m]
        if j != i:
            out[i] += ik[j] * t[m]
    return out


def _div_antisym(grid: Grid, b: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Div(b (x) u - u (x) b); only the d(d-1)/2 independent entries are transformed."""
    d = grid.d
    ik = grid.ik_dealiased
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    t = _to_spectral(grid, np.stack([b[i] * u[j] - u[i] * b[j] for i, j in pairs]))
    out = np.zeros((d, *grid.spectral_shape), dtype=complex)
    for m, (i, j) in enumerate(pairs):
        out[j] += ik[i] * t[m]
        out[i] -= ik[j] * t[m]
    return out


def nonlinear_div_tensor(a: SpectralVectorField, c: SpectralVectorField) -> SpectralVectorField:
    """Component j of the result is sum_i d_i (a_i c_j), computed pseudo-spectrally."""
    if a.grid != c.grid:
        raise GridMismatch("operands live on different grids")
    grid = a.grid
    if a.ncomp != grid.d:
        raise DimensionMismatch("the differentiated factor needs d components")
    ap = a.physical()
    if c is a:
        return SpectralVectorField(grid, _div_sym(grid, ap))
    return SpectralVectorField(grid, _div_tensor(grid, ap, c.physical()))
