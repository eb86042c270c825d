"""Initial conditions, Lebesgue/Sobolev norms and the log-Sobolev ratio."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    ConfigurationError,
    DimensionMismatch,
    ExponentTooSmall,
    InvalidExponent,
    NonDivergenceFreeInput,
)
from .spectral import (
    Grid,
    SpectralScalar,
    SpectralVectorField,
    _project,
    _to_physical,
    _to_spectral,
)

Field = Union[SpectralScalar, SpectralVectorField]


@dataclass(frozen=True)
class NormRequest:
    kind: str  # "Lp" | "Sobolev" | "HomSobolev" | "LinfPhysical"
    param: float = 2.0

    KINDS = ("Lp", "Sobolev", "HomSobolev", "LinfPhysical")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidExponent(f"unknown norm kind {self.kind!r}")
        if self.kind == "Lp" and not (self.param >= 1):
            raise InvalidExponent(f"L^p needs p in [1, inf], got {self.param}")
        if self.kind == "Sobolev" and self.param < 0:
            raise InvalidExponent(f"H^s needs s >= 0, got {self.param}")

    @classmethod
    def parse(cls, text: str) -> "NormRequest":
        """Parse ``L2``, ``Linf``, ``L3.5``, ``H1``, ``Hdot-0.5`` style names."""
        t = text.strip()
        if t.lower() in ("linf", "l_inf", "linfphysical"):
            return cls("LinfPhysical")
        if t.startswith("Hdot"):
            return cls("HomSobolev", float(t[4:]))
        if t.startswith("H"):
            return cls("Sobolev", float(t[1:]))
        if t.startswith("L"):
            return cls("Lp", float(t[1:]))
        raise InvalidExponent(f"cannot parse norm name {text!r}")


def Lp(p: float) -> NormRequest:
    if math.isinf(p):
        return NormRequest("LinfPhysical")
    return NormRequest("Lp", p)


def Sobolev(s: float) -> NormRequest:
    return NormRequest("Sobolev", s)


def HomSobolev(s: float) -> NormRequest:
    return NormRequest("HomSobolev", s)


def _as_components(f: Field) -> np.ndarray:
    return f.coeffs[None] if isinstance(f, SpectralScalar) else f.coeffs


def spectral_weighted_sq(grid: Grid, coeffs: np.ndarray, weight: np.ndarray) -> float:
    """sum over the full spectrum of weight(k) * sum_j |c_j(k)|^2."""
    power = coeffs.real**2 + coeffs.imag**2
    if coeffs.ndim > grid.d:
        power = np.sum(power, axis=0)
    return float(np.sum(grid.multiplicity * weight * power))


def hom_weight(grid: Grid, s: float) -> np.ndarray:
    if s == 0:
        return np.ones(grid.spectral_shape)
    return grid.radial_power(2.0 * s)


def hom_sobolev_sq(grid: Grid, coeffs: np.ndarray, s: float) -> float:
    return spectral_weighted_sq(grid, coeffs, hom_weight(grid, s))


def sobolev_sq(grid: Grid, coeffs: np.ndarray, s: float) -> float:
    return spectral_weighted_sq(grid, coeffs, (1.0 + grid.kmag2) ** s)


def physical_magnitude(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    vals = _to_physical(grid, coeffs)
    if coeffs.ndim == grid.d:
        return np.abs(vals)
    return np.sqrt(np.sum(vals**2, axis=0))


def lp_from_magnitude(grid: Grid, mag: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.max(mag, initial=0.0))
    if p == 2:
        return math.sqrt(float(np.sum(mag**2)) * grid.cell_volume)
    return (float(np.sum(mag**p)) * grid.cell_volume) ** (1.0 / p)


def norm(f: Field, req: NormRequest) -> float:
    grid = f.grid
    c = _as_components(f)
    if req.kind == "Sobolev":
        return math.sqrt(sobolev_sq(grid, c, req.param))
    if req.kind == "HomSobolev":
        s = req.param
        if s < 0 and not f.is_zero_mean():
            raise InvalidExponent("negative-order homogeneous norm needs zero-mean input")
        return math.sqrt(hom_sobolev_sq(grid, c, s))
    mag = physical_magnitude(grid, c)
    if req.kind == "LinfPhysical":
        return lp_from_magnitude(grid, mag, math.inf)
    return lp_from_magnitude(grid, mag, req.param)


def l2_norm(f: Field) -> float:
    return math.sqrt(hom_sobolev_sq(f.grid, _as_components(f), 0.0))


# --------------------------------------------------------------------------
# initial conditions


@dataclass(frozen=True)
class SingleMode:
    """b(x) = amplitude * polarization * sin(k.x + phase)."""

    k: tuple[int, ...]
    polarization: tuple[float, ...]
    amplitude: float = 1.0
    phase: float = 0.0


@dataclass(frozen=True)
class ABC:
    A: float = 1.0
    B: float = 1.0
    C: float = 1.0


@dataclass(frozen=True)
class OrszagTangLike:
    """b = amplitude * (-sin x_2, sin 2 x_1)."""

    amplitude: float = 1.0


@dataclass(frozen=True)
class RandomBandLimited:
    k_min: float
    k_max: float
    seed: int
    target_Hs_norm: float
    s: float


@dataclass(frozen=True)
class Zero:
    pass


InitialCondition = Union[SingleMode, ABC, OrszagTangLike, RandomBandLimited, Zero]


def make_initial(ic: InitialCondition, grid: Grid) -> SpectralVectorField:
    """Real, zero-mean, divergence-free initial magnetic field."""
    if isinstance(ic, SingleMode):
        return _single_mode(ic, grid)
    if isinstance(ic, ABC):
        if grid.d != 3:
            raise DimensionMismatch("the ABC field needs d = 3")
        x1, x2, x3 = grid.coords()
        vals = np.stack(
            [
                ic.A * np.sin(x3) + ic.C * np.cos(x2),
                ic.B * np.sin(x1) + ic.A * np.cos(x3),
                ic.C * np.sin(x2) + ic.B * np.cos(x1),
            ]
        )
        return _finish(grid, _to_spectral(grid, vals))
    if isinstance(ic, OrszagTangLike):
        if grid.d != 2:
            raise DimensionMismatch("the Orszag-Tang-like field needs d = 2")
        x1, x2 = grid.coords()
        vals = ic.amplitude * np.stack([-np.sin(x2), np.sin(2.0 * x1)])
        return _finish(grid, _to_spectral(grid, vals))
    if isinstance(ic, RandomBandLimited):
        return _random_band_limited(ic, grid)
    if isinstance(ic, Zero):
        return SpectralVectorField.zeros(grid)
    raise ConfigurationError(f"unknown initial condition {ic!r}")


def _finish(grid: Grid, c: np.ndarray) -> SpectralVectorField:
    c = c * grid.dealias_mask
    c[(slice(None), *([0] * grid.d))] = 0.0
    return SpectralVectorField(grid, c)


def _single_mode(ic: SingleMode, grid: Grid) -> SpectralVectorField:
    k = np.asarray(ic.k, dtype=float)
    pol = np.asarray(ic.polarization, dtype=float)
    if k.shape != (grid.d,) or pol.shape != (grid.d,):
        raise DimensionMismatch(f"wavevector and polarization need {grid.d} entries")
    if not np.all(k == np.round(k)) or not np.any(k):
        raise ConfigurationError(f"wavevector must be a nonzero integer vector, got {ic.k}")
    if np.max(np.abs(k)) > grid.dealias_cutoff:
        raise ConfigurationError(f"wavevector {ic.k} lies above the dealiasing cutoff")
    if abs(float(k @ pol)) > 1e-12 * max(float(np.linalg.norm(pol)), 1.0) * float(np.linalg.norm(k)):
        raise NonDivergenceFreeInput(
            f"polarization {ic.polarization} is not orthogonal to k = {ic.k}"
        )
    phase = sum(ki * xi for ki, xi in zip(k, grid.coords())) + ic.phase
    vals = ic.amplitude * pol.reshape((grid.d,) + (1,) * grid.d) * np.sin(phase)
    return _finish(grid, _to_spectral(grid, vals))


def _random_band_limited(ic: RandomBandLimited, grid: Grid) -> SpectralVectorField:
    if not 0 < ic.k_min <= ic.k_max:
        raise ConfigurationError(f"need 0 < k_min <= k_max, got {ic.k_min}, {ic.k_max}")
    if ic.k_max > grid.dealias_cutoff:
        raise ConfigurationError(
            f"k_max = {ic.k_max} exceeds the dealiasing cutoff {grid.dealias_cutoff}"
        )
    if ic.target_Hs_norm < 0 or ic.s < 0:
        raise ConfigurationError("target norm and s must be non-negative")
    rng = np.random.default_rng(ic.seed)
    shape = (grid.d, *grid.spectral_shape)
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    band = (grid.kmag >= ic.k_min) & (grid.kmag <= ic.k_max)
    c = c * band
    # round trip through physical space keeps only the Hermitian part
    c = _to_spectral(grid, _to_physical(grid, c))
    c = _project(grid, c) * band
    c[(slice(None), *([0] * grid.d))] = 0.0
    current = math.sqrt(sobolev_sq(grid, c, ic.s))
    if current == 0.0:
        raise ConfigurationError("band contains no admissible modes")
    return SpectralVectorField(grid, c * (ic.target_Hs_norm / current))


# --------------------------------------------------------------------------
# logarithmic Sobolev ratio


def log_sobolev_check(f: Field, s: float) -> float:
    """||f||_inf / (1 + ||f||_{Hdot^{d/2}} log(e + ||f||_{Hdot^s})) for zero-mean f."""
    d = f.grid.d
    if s <= d / 2:
        raise ExponentTooSmall(f"need s > d/2 = {d / 2}, got {s}")
    if not f.is_zero_mean():
        raise ConfigurationError("log-Sobolev ratio is defined for zero-mean fields")
    linf = norm(f, NormRequest("LinfPhysical"))
    if linf == 0.0:
        raise ConfigurationError("log-Sobolev ratio is undefined for the zero field")
    crit = norm(f, HomSobolev(d / 2))
    high = norm(f, HomSobolev(s))
    return linf / (1.0 + crit * math.log(math.e + high))


def log_sobolev_family(grid: Grid, N: float) -> SpectralScalar:
    """sum over 1 <= |k| <= N of |k|^{-d/2} e^{ik.x}, scaled to unit Hdot^{d/2} norm."""
    if 2 * N > grid.n // 2:
        raise ConfigurationError(f"N = {N} needs n > {4 * N}")
    d = grid.d
    shell = (grid.kmag >= 1) & (grid.kmag <= N)
    c = np.where(shell, grid.radial_power(-d / 2), 0.0).astype(complex)
    c /= math.sqrt(hom_sobolev_sq(grid, c, d / 2))
    return SpectralScalar(grid, c)


def cauchy_schwarz_linf_bound(grid: Grid, N: float) -> float:
    """(2 pi)^{-d/2} (sum_{1<=|k|<=N} |k|^{-d})^{1/2}: sup-norm bound for unit Hdot^{d/2} data."""
    d = grid.d
    shell = (grid.kmag >= 1) & (grid.kmag <= N)
    total = float(np.sum(grid.multiplicity * np.where(shell, grid.radial_power(-d), 0.0)))
    return (2.0 * math.pi) ** (-d / 2) * math.sqrt(total)


def random_field(grid: Grid, rng: np.random.Generator, k_max: float, k_min: float = 1.0,
                 divergence_free: bool = True, ncomp: int | None = None) -> SpectralVectorField:
    """Real zero-mean random field band-limited to k_min <= |k| <= k_max (test helper)."""
    m = grid.d if ncomp is None else ncomp
    shape = (m, *grid.spectral_shape)
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    band = (grid.kmag >= k_min) & (grid.kmag <= k_max)
    c = _to_spectral(grid, _to_physical(grid, c * band))
    if divergence_free and m == grid.d:
        c = _project(grid, c)
    c = c * band
    c[(slice(None), *([0] * grid.d))] = 0.0
    return SpectralVectorField(grid, c)


def vector_from_scalar(f: SpectralScalar, d: int | None = None, index: int = 0) -> SpectralVectorField:
    d = f.grid.d if d is None else d
    c = np.zeros((d, *f.grid.spectral_shape), dtype=complex)
    c[index] = f.coeffs
    return SpectralVectorField(f.grid, c)
