"""Per-sample diagnostics and the magnetic helicity."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ..errors import WrongDimension
from ..fields import hom_sobolev_sq, lp_from_magnitude, physical_magnitude, sobolev_sq
from ..spectral import Grid, SpectralVectorField, _to_physical
from ..stokes import velocity_coeffs

RECORD_KEYS = (
    "t",
    "M",
    "H",
    "u_Ha2",
    "u_Hd2p1",
    "b_Hs",
    "b_H1",
    "b_Lp",
    "energy_residual",
    "cont_integral",
    "arnold_margin",
)


@dataclass
class DiagnosticsRecord:
    t: float
    M: float
    H: Optional[float]
    u_Ha2: float
    u_Hd2p1: float
    b_Hs: float
    b_H1: float
    b_Lp: float
    energy_residual: float
    cont_integral: float
    arnold_margin: Optional[float]

    def to_dict(self) -> dict:
        return asdict(self)


def _helicity(grid: Grid, c: np.ndarray) -> float:
    k = grid.kvec
    cross = np.stack(
        [
            k[1] * c[2] - k[2] * c[1],
            k[2] * c[0] - k[0] * c[2],
            k[0] * c[1] - k[1] * c[0],
        ]
    )
    a_hat = 1j * cross * grid.inv_kvec2
    dots = np.sum(a_hat * np.conj(c), axis=0).real
    return float(np.sum(grid.multiplicity * dots))


def magnetic_helicity(b: SpectralVectorField) -> float:
    """H = integral of A . b with the zero-mean Coulomb-gauge potential (curl A = b)."""
    if b.grid.d != 3 or b.ncomp != 3:
        raise WrongDimension("magnetic helicity is defined for d = 3")
    return _helicity(b.grid, b.coeffs)


def energy_change(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    """M(b) - M(a) as (1/2) <b - a, b + a>, free of cancellation between M values."""
    prod = ((b - a) * np.conj(b + a)).real
    return 0.5 * float(np.sum(grid.multiplicity * np.sum(prod, axis=0)))


@dataclass
class SampleState:
    """Running quantities carried between samples (and through checkpoints)."""

    t: float
    coeffs: np.ndarray
    u_Hd2p1: float
    u_Ha2: float
    cont_integral: float = 0.0
    dissipation_integral: float = 0.0


class RecordBuilder:
    """Turns successive samples of b into DiagnosticsRecords."""

    def __init__(self, grid: Grid, alpha: float, beta: float, nu: float, eta: float,
                 s: float, lp: float):
        self.grid = grid
        self.alpha, self.beta, self.nu, self.eta = alpha, beta, nu, eta
        self.s, self.lp = s, lp
        self.prev: Optional[SampleState] = None

    def velocity(self, coeffs: np.ndarray) -> np.ndarray:
        return velocity_coeffs(self.grid, _to_physical(self.grid, coeffs), self.alpha, self.nu)

    def dissipation(self, coeffs: np.ndarray) -> float:
        """nu ||Lambda^alpha u||^2 + eta ||Lambda^beta b||^2 at the field ``coeffs``."""
        u = self.velocity(coeffs)
        out = self.nu * hom_sobolev_sq(self.grid, u, self.alpha)
        if self.eta:
            out += self.eta * hom_sobolev_sq(self.grid, coeffs, self.beta)
        return out

    def sample(self, t: float, coeffs: np.ndarray) -> DiagnosticsRecord:
        g = self.grid
        u = self.velocity(coeffs)
        u_ha2 = hom_sobolev_sq(g, u, self.alpha)
        u_top = math.sqrt(hom_sobolev_sq(g, u, g.d / 2 + 1))
        M = 0.5 * hom_sobolev_sq(g, coeffs, 0.0)
        H = _helicity(g, coeffs) if g.d == 3 else None
        residual = 0.0
        cont = 0.0
        diss_int = 0.0
        if self.prev is not None:
            prev = self.prev
            dt = t - prev.t
            residual = energy_change(g, prev.coeffs, coeffs) / dt
            residual += self.dissipation(0.5 * (prev.coeffs + coeffs))
            cont = prev.cont_integral + 0.5 * dt * (prev.u_Hd2p1 + u_top)
            diss_int = prev.dissipation_integral + 0.5 * dt * (prev.u_Ha2 + u_ha2)
        self.prev = SampleState(t, coeffs.copy(), u_top, u_ha2, cont, diss_int)
        return DiagnosticsRecord(
            t=t,
            M=M,
            H=H,
            u_Ha2=u_ha2,
            u_Hd2p1=u_top,
            b_Hs=math.sqrt(sobolev_sq(g, coeffs, self.s)),
            b_H1=math.sqrt(sobolev_sq(g, coeffs, 1.0)),
            b_Lp=lp_from_magnitude(g, physical_magnitude(g, coeffs), self.lp),
            energy_residual=residual,
            cont_integral=cont,
            arnold_margin=None if H is None else M - abs(H) / 2,
        )
