"""Time integration of the induction equation with a quasi-static velocity.

    d_t b + eta Lambda^{2 beta} b = Div(b (x) u - u (x) b),
    u = nu^{-1} Lambda^{-2 alpha} P Div(b (x) b).

The linear term is absorbed by an integrating factor and the remaining
nonlinearity is advanced with classical RK4 (the Lawson scheme).  With
N = 0 the scheme reproduces the semigroup decay of every mode exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .diagnostics.records import DiagnosticsRecord, RecordBuilder, SampleState
from .errors import ConfigurationError, NonFiniteField
from .fields import InitialCondition, RandomBandLimited, make_initial, sobolev_sq
from .spectral import Grid, SpectralVectorField, _div_antisym, _project, _to_physical
from .stokes import _check_input, velocity_coeffs

COMPLETED = "Completed"
BLOWUP = "BlowupSuspected"
DIVERGED = "Diverged"

BLOWUP_GROWTH = 1e6
DT_FLOOR = 1e-12
U_FLOOR = 1e-8


@dataclass
class SimParams:
    """Physical and numerical parameters of one simulation.

    Exactly one of ``dt`` (fixed step) and ``cfl_number`` (adaptive step) is
    used; when ``cfl_number`` is set it wins and ``dt_max`` caps the step.
    ``ic = None`` draws a random band-limited field from ``seed`` with unit
    H^s norm.
    """

    d: int = 2
    n: int = 32
    alpha: float = 1.0
    beta: float = 1.0
    nu: float = 1.0
    eta: float = 0.0
    s: float = 1.0
    lp: float = 2.0
    t_end: float = 1.0
    dt: Optional[float] = 1e-3
    cfl_number: Optional[float] = None
    dt_max: float = 1e-2
    sample_every: int = 1
    seed: int = 0
    ic: Optional[InitialCondition] = None
    reproject_every: int = 1

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ConfigurationError(f"d must be 2 or 3, got {self.d}")
        Grid(self.d, self.n)
        if not self.nu > 0:
            raise ConfigurationError(f"nu must be > 0, got {self.nu}")
        if self.alpha < 0:
            raise ConfigurationError(f"alpha must be >= 0, got {self.alpha}")
        if not self.beta > 0:
            raise ConfigurationError(f"beta must be > 0, got {self.beta}")
        if self.eta < 0:
            raise ConfigurationError(f"eta must be >= 0, got {self.eta}")
        if not self.t_end > 0:
            raise ConfigurationError(f"t_end must be > 0, got {self.t_end}")
        if not self.lp >= 1:
            raise ConfigurationError(f"lp must be >= 1, got {self.lp}")
        if self.cfl_number is not None:
            if not 0 < self.cfl_number <= 1:
                raise ConfigurationError(f"cfl_number must lie in (0, 1], got {self.cfl_number}")
            if not self.dt_max > 0:
                raise ConfigurationError(f"dt_max must be > 0, got {self.dt_max}")
        elif self.dt is None or not self.dt > 0:
            raise ConfigurationError(f"dt must be > 0 in fixed-step mode, got {self.dt}")
        if self.sample_every < 1 or self.reproject_every < 1:
            raise ConfigurationError("sample_every and reproject_every must be >= 1")

    @property
    def grid(self) -> Grid:
        return Grid(self.d, self.n)

    @property
    def adaptive(self) -> bool:
        return self.cfl_number is not None

    def initial_condition(self) -> InitialCondition:
        if self.ic is not None:
            return self.ic
        k_max = min(4, self.grid.dealias_cutoff)
        return RandomBandLimited(1, k_max, self.seed, 1.0, self.s)


@dataclass
class Trajectory:
    params: SimParams
    times: list[float]
    records: list[DiagnosticsRecord]
    status: str
    final: SpectralVectorField
    final_time: float
    steps: int
    fields: Optional[list[SpectralVectorField]] = None
    message: str = ""
    # trapezoid running integral of ||u||^2_{Hdot^alpha}, one entry per sample
    dissipation_integral: list[float] = field(default_factory=list)
    state: Optional["RunState"] = None


class Stepper:
    """Lawson RK4 for one parameter set; caches the integrating factors."""

    def __init__(self, params: SimParams):
        self.params = params
        self.grid = params.grid
        self.lin = params.eta * self.grid.radial_power(2.0 * params.beta)
        self._dt = None
        self._factors = None
        self.last_umax = 0.0

    def factors(self, dt: float):
        if dt != self._dt:
            if self.params.eta:
                self._factors = (np.exp(-dt * self.lin), np.exp(-0.5 * dt * self.lin))
            else:
                self._factors = (None, None)
            self._dt = dt
        return self._factors

    def nonlinear(self, c: np.ndarray) -> np.ndarray:
        g, p = self.grid, self.params
        bp = _to_physical(g, c)
        up = _to_physical(g, velocity_coeffs(g, bp, p.alpha, p.nu))
        self.last_umax = float(np.max(np.sqrt(np.sum(up * up, axis=0))))
        return _project(g, _div_antisym(g, bp, up))

    def step(self, c: np.ndarray, dt: float, k1: Optional[np.ndarray] = None) -> np.ndarray:
        E, E2 = self.factors(dt)
        if k1 is None:
            k1 = self.nonlinear(c)
        if E is None:
            k2 = self.nonlinear(c + 0.5 * dt * k1)
            k3 = self.nonlinear(c + 0.5 * dt * k2)
            k4 = self.nonlinear(c + dt * k3)
            out = c + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        else:
            k2 = self.nonlinear(E2 * (c + 0.5 * dt * k1))
            k3 = self.nonlinear(E2 * c + 0.5 * dt * k2)
            k4 = self.nonlinear(E * c + dt * (E2 * k3))
            out = E * c + (dt / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)
        if not np.all(np.isfinite(out)):
            raise NonFiniteField("non-finite coefficient after a time step")
        return out


def _as_state(b: SpectralVectorField, params: SimParams) -> np.ndarray:
    if b.grid != params.grid:
        raise ConfigurationError(f"field grid {b.grid} does not match parameters {params.grid}")
    return b.coeffs


def rhs(b: SpectralVectorField, params: SimParams) -> SpectralVectorField:
    """N(b) = P Div(b (x) u - u (x) b), without the linear dissipation."""
    _check_input(b)
    return SpectralVectorField(b.grid, Stepper(params).nonlinear(_as_state(b, params)))


def step_ifrk4(b: SpectralVectorField, dt: float, params: SimParams) -> SpectralVectorField:
    if not dt > 0:
        raise ConfigurationError(f"dt must be > 0, got {dt}")
    return SpectralVectorField(b.grid, Stepper(params).step(_as_state(b, params), dt))


def _cfl(umax: float, params: SimParams) -> float:
    dt = params.cfl_number * (2.0 * math.pi / params.n) / max(umax, U_FLOOR)
    return min(dt, params.dt_max)


def cfl_dt(b: SpectralVectorField, params: SimParams) -> float:
    """Advective step limit, capped by ``dt_max``."""
    if params.cfl_number is None:
        raise ConfigurationError("cfl_dt needs cfl_number")
    g = params.grid
    up = _to_physical(g, velocity_coeffs(g, b.physical(), params.alpha, params.nu))
    return _cfl(float(np.max(np.sqrt(np.sum(up * up, axis=0)))), params)


@dataclass
class RunState:
    """Everything needed to continue a run bitwise: the field plus accumulators."""

    step: int
    t: float
    coeffs: np.ndarray
    hs0: float
    sample: Optional[SampleState] = None


def _fixed_schedule(params: SimParams) -> tuple[int, float]:
    """Number of steps and the length of the last one in fixed-step mode."""
    dt = params.dt
    nfull = math.floor(params.t_end / dt + 1e-9)
    if abs(nfull * dt - params.t_end) <= 1e-12 * params.t_end:
        return nfull, dt
    return nfull + 1, params.t_end - nfull * dt


def run(
    params: SimParams,
    *,
    b0: Optional[SpectralVectorField] = None,
    on_record: Optional[Callable[[DiagnosticsRecord], None]] = None,
    on_checkpoint: Optional[Callable[[RunState], None]] = None,
    checkpoint_every: int = 0,
    keep_fields: bool = False,
    resume: Optional[RunState] = None,
    raise_on_diverged: bool = False,
) -> Trajectory:
    """Integrate from the initial condition (or ``resume``) up to ``t_end``.

    Non-finite fields end the run with status Diverged unless
    ``raise_on_diverged`` is set, in which case NonFiniteField propagates.
    """
    if checkpoint_every and checkpoint_every % params.sample_every:
        raise ConfigurationError("checkpoint_every must be a multiple of sample_every")
    grid = params.grid
    stepper = Stepper(params)
    builder = RecordBuilder(grid, params.alpha, params.beta, params.nu, params.eta,
                            params.s, params.lp)
    times: list[float] = []
    records: list[DiagnosticsRecord] = []
    diss: list[float] = []
    kept: list[SpectralVectorField] = []

    def emit(t: float, c: np.ndarray) -> None:
        rec = builder.sample(t, c)
        times.append(t)
        records.append(rec)
        diss.append(builder.prev.dissipation_integral)
        if keep_fields:
            kept.append(SpectralVectorField(grid, c.copy()))
        if on_record is not None:
            on_record(rec)

    if resume is None:
        b = make_initial(params.initial_condition(), grid) if b0 is None else b0
        _check_input(b)
        c = _as_state(b, params).copy()
        step, t = 0, 0.0
        hs0 = math.sqrt(sobolev_sq(grid, c, params.s))
        emit(t, c)
    else:
        c = resume.coeffs.copy()
        step, t, hs0 = resume.step, resume.t, resume.hs0
        builder.prev = resume.sample

    if not params.adaptive:
        nsteps, last_dt = _fixed_schedule(params)
    status, message = COMPLETED, ""
    while True:
        if params.adaptive:
            if t >= params.t_end:
                break
            k1 = stepper.nonlinear(c)
            dt = _cfl(stepper.last_umax, params)
            if dt < DT_FLOOR:
                status, message = BLOWUP, f"time step {dt:.3e} below floor"
                break
            dt = min(dt, params.t_end - t)
        else:
            if step >= nsteps:
                break
            k1 = None
            dt = params.dt if step + 1 < nsteps else last_dt
        try:
            c = stepper.step(c, dt, k1)
        except NonFiniteField as exc:
            if raise_on_diverged:
                raise
            status, message = DIVERGED, str(exc)
            break
        step += 1
        if params.adaptive:
            t = t + dt
            final_step = t >= params.t_end
        else:
            final_step = step == nsteps
            t = params.t_end if final_step else step * params.dt
        if step % params.reproject_every == 0:
            c = _project(grid, c)
            c[(slice(None), *([0] * grid.d))] = 0.0
        hs = math.sqrt(sobolev_sq(grid, c, params.s))
        blown = hs0 > 0 and hs > BLOWUP_GROWTH * hs0
        if step % params.sample_every == 0 or final_step or blown:
            emit(t, c)
        if blown:
            status, message = BLOWUP, f"H^s norm grew from {hs0:.3e} to {hs:.3e}"
            break
        if on_checkpoint is not None and checkpoint_every and step % checkpoint_every == 0 \
                and not final_step:
            on_checkpoint(RunState(step, t, c.copy(), hs0, builder.prev))

    traj = Trajectory(
        params=params,
        times=times,
        records=records,
        status=status,
        final=SpectralVectorField(grid, c),
        final_time=t,
        steps=step,
        fields=kept if keep_fields else None,
        message=message,
        dissipation_integral=diss,
        state=RunState(step, t, c, hs0, builder.prev),
    )
    return traj


def integrate_to(params: SimParams, b0: SpectralVectorField, targets) -> list[SpectralVectorField]:
    """Fields at each of the increasing ``targets``, stepping at most ``params.dt``.

    Each interval between targets is split into equal substeps so that every
    target is hit exactly.
    """
    stepper = Stepper(params)
    c = _as_state(b0, params).copy()
    t = 0.0
    out = []
    for target in targets:
        if target < t:
            raise ConfigurationError("targets must be non-decreasing and non-negative")
        span = target - t
        if span > 0:
            m = max(1, math.ceil(span / params.dt - 1e-9))
            h = span / m
            for _ in range(m):
                c = stepper.step(c, h)
            t = target
        out.append(SpectralVectorField(b0.grid, c.copy()))
    return out
