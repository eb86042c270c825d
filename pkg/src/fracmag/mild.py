"""Fractional heat semigroup and the Picard iteration for mild solutions.

On the torus G(t) is the Fourier multiplier exp(-t eta |k|^{2 beta}); the
mild formulation reads

    b(t) = G(t) b_0 + int_0^t G(t - s) N(b(s)) ds,   N(b) = Div(b (x) u - u (x) b).

The time integral is evaluated by exponential product integration: on each
subinterval the forcing is linear in s and the exponential moments are
integrated exactly, mode by mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    EmptyTrajectory,
    ExponentOrder,
    GridMismatch,
    NegativeTime,
    NonContractive,
    NonFiniteField,
)
from .fields import lp_from_magnitude, physical_magnitude
from .regimes import classify
from .spectral import Grid, SpectralVectorField

_TAYLOR_CUTOFF = 1.0
_TAYLOR_TERMS = 25


@dataclass(frozen=True)
class SemigroupOp:
    beta: float
    grid: Grid
    eta: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ConfigurationError(f"beta must be > 0, got {self.beta}")
        if self.eta < 0:
            raise ConfigurationError(f"eta must be >= 0, got {self.eta}")

    @property
    def rate(self) -> np.ndarray:
        """eta |k|^{2 beta} per mode."""
        return self.eta * self.grid.radial_power(2.0 * self.beta)

    def multiplier(self, t: float) -> np.ndarray:
        if t < 0:
            raise NegativeTime(f"semigroup time must be >= 0, got {t}")
        return np.exp(-t * self.rate)


def semigroup_apply(op: SemigroupOp, t: float, f):
    """G(t) f for a scalar or vector field on ``op.grid``."""
    if f.grid != op.grid:
        raise GridMismatch("field and semigroup live on different grids")
    mult = op.multiplier(t)
    if t == 0:
        return f.copy()
    return f._new(f.coeffs * mult)


def _lq(grid: Grid, coeffs: np.ndarray, q: float) -> float:
    return lp_from_magnitude(grid, physical_magnitude(grid, coeffs), q)


def smoothing_ratio(op: SemigroupOp, t: float, f, gamma: float, p: float, q: float) -> float:
    """||Lambda^gamma G(t) f||_{L^q} t^{gamma/(2 beta) + (d/(2 beta))(1/p - 1/q)} / ||f||_{L^p}."""
    if q < p:
        raise ExponentOrder(f"need q >= p, got p = {p}, q = {q}")
    if not t > 0:
        raise NegativeTime(f"smoothing ratio needs t > 0, got {t}")
    if gamma < 0:
        raise ConfigurationError(f"gamma must be >= 0, got {gamma}")
    grid = op.grid
    if not f.is_zero_mean():
        raise ConfigurationError("smoothing ratio is defined for zero-mean fields")
    c = f.coeffs * op.multiplier(t)
    if gamma:
        c = c * grid.radial_power(gamma)
    d, beta = grid.d, op.beta
    expo = gamma / (2 * beta) + (d / (2 * beta)) * (1 / p - 1 / q)
    denom = _lq(grid, f.coeffs, p)
    if denom == 0:
        raise ConfigurationError("smoothing ratio is undefined for the zero field")
    return _lq(grid, c, q) * t**expo / denom


def smoothing_bound(grid: Grid, beta: float, gamma: float, q: float, t: float) -> float:
    """Upper bound for the L^2 -> L^q smoothing ratio on the lattice at time t.

    q = 2 uses sup_k, q = inf uses Cauchy-Schwarz over the lattice, and q = 4
    interpolates between the two with ||g||_4^2 <= ||g||_2 ||g||_inf.
    """
    d = grid.d
    lam = grid.radial_power(2.0 * beta) * t
    nz = grid.kmag2 > 0
    kg = grid.radial_power(gamma)

    def b22():
        return float(np.max((kg * np.exp(-lam))[nz])) * t ** (gamma / (2 * beta))

    def b2inf():
        s = float(np.sum(grid.multiplicity * kg**2 * np.exp(-2.0 * lam) * nz))
        return (2 * math.pi) ** (-d / 2) * math.sqrt(s * t ** (gamma / beta + d / (2 * beta)))

    if q == 2:
        return b22()
    if math.isinf(q):
        return b2inf()
    if q == 4:
        return math.sqrt(b22() * b2inf())
    raise ConfigurationError(f"no lattice bound implemented for q = {q}")


def sharp_l2_bound(beta: float, gamma: float) -> float:
    """sup_{x > 0} x^{gamma/(2 beta)} exp(-x) = (gamma / (2 beta e))^{gamma/(2 beta)}."""
    if gamma == 0:
        return 1.0
    a = gamma / (2 * beta)
    return (a / math.e) ** a


# --------------------------------------------------------------------------
# exponential product integration


def _phi(z: np.ndarray, j: int) -> np.ndarray:
    """phi_j(z) = sum_m (-z)^m / (m + j)!, evaluated stably for z >= 0."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < _TAYLOR_CUTOFF
    zs = z[small]
    acc = np.zeros_like(zs)
    term = np.full_like(zs, 1.0 / math.factorial(j))
    for m in range(_TAYLOR_TERMS):
        acc += term
        term = term * (-zs) / (m + j + 1)
    out[small] = acc
    zl = z[~small]
    em1 = np.expm1(-zl)
    if j == 1:
        out[~small] = -em1 / zl
    elif j == 2:
        out[~small] = (zl + em1) / zl**2
    else:
        raise ValueError("only phi_1 and phi_2 are needed")
    return out


def interval_weights(rate: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Weights (w_left, w_right) with

    int_0^h exp(-rate (h - s)) F(s) ds = w_left F(0) + w_right F(h)

    exactly for F linear in s.
    """
    z = rate * h
    w_right = h * _phi(z, 2)
    w_left = h * _phi(z, 1) - w_right
    return w_left, w_right


def _check_times(times: np.ndarray) -> None:
    if times.ndim != 1 or len(times) < 1:
        raise ConfigurationError("time grid must be a non-empty 1-D sequence")
    if times[0] < 0:
        raise NegativeTime("time grid must be non-negative")
    if np.any(np.diff(times) <= 0):
        raise ConfigurationError("time grid must be strictly increasing")


def _with_origin(times: Sequence[float], forcing: list) -> tuple[np.ndarray, list]:
    times = np.asarray(times, dtype=float)
    _check_times(times)
    if times[0] > 0:
        # forcing on [0, t_0] is held at its first sample
        return np.concatenate([[0.0], times]), [forcing[0]] + list(forcing)
    return times, list(forcing)


def duhamel_series(rate: np.ndarray, times: np.ndarray, forcing: list) -> list[np.ndarray]:
    """I(t_m) = int_0^{t_m} exp(-rate (t_m - s)) F(s) ds on a grid starting at 0."""
    out = [np.zeros_like(forcing[0])]
    acc = out[0]
    for m in range(len(times) - 1):
        h = times[m + 1] - times[m]
        wl, wr = interval_weights(rate, h)
        acc = np.exp(-rate * h) * acc + wl * forcing[m] + wr * forcing[m + 1]
        out.append(acc)
    return out


def duhamel_weights(op: SemigroupOp, t_grid: Sequence[float]) -> list[np.ndarray]:
    """Per-node weights W_m with int_0^T G(T - s) F(s) ds = sum_m W_m F(t_m)."""
    times = np.asarray(t_grid, dtype=float)
    _check_times(times)
    rate = op.rate
    T = times[-1]
    W = [np.zeros(op.grid.spectral_shape) for _ in times]
    if times[0] > 0:
        W[0] += (1.0 - np.exp(-rate * times[0])) / np.where(rate > 0, rate, 1.0) * (rate > 0)
        W[0] += times[0] * (rate == 0)
        W[0] *= np.exp(-rate * (T - times[0]))
    for m in range(len(times) - 1):
        h = times[m + 1] - times[m]
        wl, wr = interval_weights(rate, h)
        decay = np.exp(-rate * (T - times[m + 1]))
        W[m] += decay * wl
        W[m + 1] += decay * wr
    return W


def duhamel_integral(op: SemigroupOp, t_grid: Sequence[float], forcing_samples) -> SpectralVectorField:
    """int_0^T G(T - s) F(s) ds with T = t_grid[-1] and F linear between samples.

    If the grid does not start at 0 the forcing on [0, t_grid[0]] is taken to
    be constant at its first sample.
    """
    forcing = list(forcing_samples)
    if len(forcing) != len(t_grid):
        raise GridMismatch(f"{len(forcing)} forcing samples for {len(t_grid)} times")
    for f in forcing:
        if f.grid != op.grid:
            raise GridMismatch("forcing sample lives on a different grid")
    times, coeffs = _with_origin(t_grid, [f.coeffs for f in forcing])
    series = duhamel_series(op.rate, times, coeffs)
    return SpectralVectorField(op.grid, series[-1])


# --------------------------------------------------------------------------
# Picard iteration


def geometric_time_grid(T: float, n_points: int = 64, first: Optional[float] = None) -> np.ndarray:
    """n_points geometrically spaced times ending at T with t_1 = first (default T/1024)."""
    if not T > 0:
        raise ConfigurationError(f"T must be > 0, got {T}")
    if n_points < 2:
        raise ConfigurationError("need at least two points")
    first = T / 1024 if first is None else first
    if not 0 < first < T:
        raise ConfigurationError("first time must lie in (0, T)")
    ratio = (T / first) ** (1.0 / (n_points - 1))
    out = first * ratio ** np.arange(n_points)
    out[-1] = T
    return out


@dataclass
class PicardConfig:
    t_grid: np.ndarray
    p: float
    q: float
    r: float
    sigma: float
    max_iters: int = 50
    tol_rel: float = 1e-8

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        _check_times(self.t_grid)
        if self.t_grid[0] <= 0:
            raise ConfigurationError("Picard sample times must be positive")
        if self.max_iters < 1 or not self.tol_rel > 0:
            raise ConfigurationError("need max_iters >= 1 and tol_rel > 0")

    @classmethod
    def for_regime(cls, d: int, alpha: float, beta: float, T: float, n_points: int = 64,
                   **kwargs) -> "PicardConfig":
        rep = classify(d, alpha, beta)
        if rep.p is None:
            raise ConfigurationError("exponents undefined: need alpha + beta > 1")
        return cls(geometric_time_grid(T, n_points), rep.p, rep.q, rep.r, rep.sigma, **kwargs)

    def check_consistency(self, d: int, alpha: float, beta: float, tol: float = 1e-12) -> None:
        inv_q = 1 / self.p - (2 * beta - 1) / (3 * d)
        inv_r = 2 / self.q - (2 * alpha - 1) / d
        sigma = d / (2 * beta) * (1 / self.p - 1 / self.q)
        if abs(1 / self.q - inv_q) > tol or abs(1 / self.r - inv_r) > tol \
                or abs(self.sigma - sigma) > tol:
            raise ConfigurationError("Picard exponents are inconsistent with (d, alpha, beta)")


@dataclass
class FieldSeries:
    times: list[float]
    fields: list[SpectralVectorField]


@dataclass
class PicardResult:
    iterations: int
    distances: list[float]
    trajectory: FieldSeries
    contraction_ratio: float
    converged: bool
    ratios: list[float] = field(default_factory=list)


def _ft(grid: Grid, times, coeffs_list, sigma: float, q: float) -> float:
    best = 0.0
    for t, c in zip(times, coeffs_list):
        if t > 0:
            best = max(best, t**sigma * _lq(grid, c, q))
    return best


def picard_solve(b0: SpectralVectorField, cfg: PicardConfig, params) -> PicardResult:
    """Fixed-point iteration b <- G b0 + Duhamel(N(b)) on {0} + cfg.t_grid."""
    from .evolve import Stepper
    from .stokes import _check_input

    if not params.eta > 0:
        raise ConfigurationError("the mild formulation needs eta > 0")
    if b0.grid != params.grid:
        raise GridMismatch("initial field does not match the parameter grid")
    _check_input(b0)
    cfg.check_consistency(params.d, params.alpha, params.beta)
    grid = b0.grid
    op = SemigroupOp(params.beta, grid, params.eta)
    times = np.concatenate([[0.0], cfg.t_grid])
    rate = op.rate
    free = [np.exp(-t * rate) * b0.coeffs for t in times]
    stepper = Stepper(params)

    current = free
    distances: list[float] = []
    ratios: list[float] = []
    above_one = 0
    converged = False
    contraction = float("nan")
    it = 0
    for it in range(1, cfg.max_iters + 1):
        forcing = [stepper.nonlinear(c) for c in current]
        integral = duhamel_series(rate, times, forcing)
        new = [f + i for f, i in zip(free, integral)]
        if not all(np.all(np.isfinite(c)) for c in new):
            raise NonFiniteField("non-finite Picard iterate")
        dist = _ft(grid, times, [a - b for a, b in zip(new, current)], cfg.sigma, cfg.q)
        size = _ft(grid, times, new, cfg.sigma, cfg.q)
        distances.append(dist)
        floor = 100 * np.finfo(float).eps * size
        if len(distances) >= 2 and distances[-2] > floor and dist > floor:
            ratio = dist / distances[-2]
            ratios.append(ratio)
            contraction = ratio
            above_one = above_one + 1 if ratio >= 1 else 0
            if above_one >= 3:
                raise NonContractive(
                    f"F_T distance grew for 3 consecutive iterations (last ratio {ratio:.3g})"
                )
        current = new
        if dist <= cfg.tol_rel * size:
            converged = True
            break

    if not ratios and converged:
        contraction = 0.0
    series = FieldSeries(list(times), [SpectralVectorField(grid, c) for c in current])
    return PicardResult(it, distances, series, contraction, converged, ratios)


def _series_fields(traj):
    fields = getattr(traj, "fields", None)
    if not fields:
        raise EmptyTrajectory("trajectory carries no fields")
    return traj.times, fields


def ft_norm(traj, sigma: float, q: float) -> float:
    """sup over positive sample times of t^sigma ||b(t)||_{L^q}."""
    times, fields = _series_fields(traj)
    pos = [(t, f) for t, f in zip(times, fields) if t > 0]
    if not pos:
        raise EmptyTrajectory("no positive sample times")
    grid = pos[0][1].grid
    return _ft(grid, [t for t, _ in pos], [f.coeffs for _, f in pos], sigma, q)


def nt_norm(traj, p: float) -> float:
    """sup over samples of ||b(t)||_{L^p}."""
    times, fields = _series_fields(traj)
    return max(_lq(f.grid, f.coeffs, p) for f in fields)
