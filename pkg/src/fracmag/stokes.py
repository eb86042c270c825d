"""Quasi-static velocity: nu Lambda^{2 alpha} u + grad p = (b . grad) b, div u = 0."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NonDivergenceFreeInput
from .spectral import (
    Grid,
    SpectralScalar,
    SpectralVectorField,
    _div_sym,
    _project,
    _to_physical,
)


@dataclass(frozen=True)
class StokesConfig:
    alpha: float = 1.0
    nu: float = 1.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        if not self.nu > 0:
            raise ConfigurationError(f"nu must be > 0, got {self.nu}")


def _check_input(b: SpectralVectorField) -> None:
    if b.ncomp != b.grid.d:
        raise NonDivergenceFreeInput("magnetic field needs d components")
    if not b.is_zero_mean():
        raise NonDivergenceFreeInput("magnetic field must have zero mean")
    if not b.is_divergence_free():
        raise NonDivergenceFreeInput(
            f"magnetic field is not divergence-free (defect {b.divergence_defect():.3e})"
        )


def velocity_coeffs(grid: Grid, b_phys: np.ndarray, alpha: float, nu: float) -> np.ndarray:
    """u_hat from physical b; the building block used by the time stepper."""
    forcing = _div_sym(grid, b_phys)
    return _project(grid, forcing) * (grid.radial_power(-2.0 * alpha) / nu)


def solve_velocity(b: SpectralVectorField, cfg: StokesConfig) -> SpectralVectorField:
    """u = nu^{-1} Lambda^{-2 alpha} P Div(b (x) b), zero mode set to 0."""
    _check_input(b)
    grid = b.grid
    return SpectralVectorField(grid, velocity_coeffs(grid, _to_physical(grid, b.coeffs), cfg.alpha, cfg.nu))


def lorentz_forcing(b: SpectralVectorField) -> SpectralVectorField:
    """Dealiased Div(b (x) b), equal to (b . grad) b for divergence-free b."""
    return SpectralVectorField(b.grid, _div_sym(b.grid, b.physical()))


def recover_pressure(b: SpectralVectorField, cfg: StokesConfig) -> SpectralScalar:
    """Zero-mean total pressure with grad p = (I - P) Div(b (x) b)."""
    _check_input(b)
    grid = b.grid
    forcing = _div_sym(grid, b.physical())
    kdotf = np.einsum("i...,i...->...", grid.kvec, forcing)
    return SpectralScalar(grid, -1j * kdotf * grid.inv_kvec2)


def momentum_residual(b: SpectralVectorField, u: SpectralVectorField, p: SpectralScalar,
                      cfg: StokesConfig) -> float:
    """max_k |nu |k|^{2 alpha} u_hat + i k p_hat - Div(b (x) b)^| over all modes."""
    grid = b.grid
    forcing = _div_sym(grid, b.physical())
    lhs = cfg.nu * grid.radial_power(2.0 * cfg.alpha) * u.coeffs + 1j * grid.kvec * p.coeffs
    return float(np.max(np.abs(lhs - forcing), initial=0.0))
