"""Pseudo-spectral solver and analysis toolkit for the Stokes-magneto system
with fractional dissipation on the periodic box."""

from .errors import (
    CheckpointError,
    ConfigurationError,
    FracMagError,
    NonContractive,
    NonFiniteField,
    NumericalFailure,
)
from .evolve import SimParams, Trajectory, cfl_dt, rhs, run, step_ifrk4
from .fields import ABC, OrszagTangLike, RandomBandLimited, SingleMode, Zero, make_initial
from .regimes import RegimeReport, classify
from .spectral import Grid, SpectralScalar, SpectralVectorField

__version__ = "0.1.0"

__all__ = [
    "ABC",
    "CheckpointError",
    "ConfigurationError",
    "FracMagError",
    "Grid",
    "NonContractive",
    "NonFiniteField",
    "NumericalFailure",
    "OrszagTangLike",
    "RandomBandLimited",
    "RegimeReport",
    "SimParams",
    "SingleMode",
    "SpectralScalar",
    "SpectralVectorField",
    "Trajectory",
    "Zero",
    "cfl_dt",
    "classify",
    "make_initial",
    "rhs",
    "run",
    "step_ifrk4",
]
