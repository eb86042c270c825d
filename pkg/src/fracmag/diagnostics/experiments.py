"""Numerical experiments built on the stepper and the Picard solver.

Every experiment returns a plain dict that serializes to JSON directly.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigurationError
from ..evolve import SimParams, integrate_to, run
from ..fields import (
    cauchy_schwarz_linf_bound,
    l2_norm,
    log_sobolev_check,
    log_sobolev_family,
    make_initial,
)
from ..mild import PicardConfig, picard_solve
from ..regimes import classify
from ..spectral import Grid, SpectralVectorField, half_spectrum

KINDS = ("Scaling", "DecayProbe", "LogSobolevSweep", "AmplitudeSweep", "PicardCross")


@dataclass
class ExperimentSpec:
    kind: str
    base: SimParams
    lam: int = 2
    s_low: Optional[float] = None
    amplitudes: tuple = (0.5, 1.0, 2.0, 4.0)
    growth_factor: float = 2.0
    logsob_N: tuple = (8, 16, 32, 64)
    logsob_n: int = 256
    picard_points: int = 64

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "Scaling":
            if int(self.lam) != self.lam or self.lam < 2:
                raise ConfigurationError(f"scaling needs an integer lambda >= 2, got {self.lam}")
            self.lam = int(self.lam)
        if self.kind == "DecayProbe":
            if self.s_low is None:
                raise ConfigurationError("DecayProbe needs s_low")
            lo, hi = decay_window(self.base)
            if not lo < 1 / self.s_low < hi:
                raise ConfigurationError(
                    f"1/s_low = {1 / self.s_low:.6g} lies outside the admissible window ({lo:.6g}, {hi:.6g})"
                )
        if self.kind == "AmplitudeSweep":
            if len(self.amplitudes) < 2 or min(self.amplitudes) <= 0:
                raise ConfigurationError("AmplitudeSweep needs at least two positive amplitudes")
            if not self.growth_factor > 1:
                raise ConfigurationError("growth_factor must exceed 1")


def decay_window(params: SimParams) -> tuple[float, float]:
    """Open interval for 1/s_low: (1/p, 2 beta/d + 2/q - 1/p)."""
    rep = classify(params.d, params.alpha, params.beta)
    if rep.p is None:
        raise ConfigurationError("exponents undefined: need alpha + beta > 1")
    return rep.theta_window


def run_experiment(spec: ExperimentSpec) -> dict:
    handler = {
        "Scaling": _scaling,
        "DecayProbe": _decay_probe,
        "LogSobolevSweep": _logsob,
        "AmplitudeSweep": _amplitude,
        "PicardCross": _picard_cross,
    }[spec.kind]
    report = handler(spec)
    report["kind"] = spec.kind
    return report


def embed(b: SpectralVectorField, lam: int, factor: float = 1.0) -> SpectralVectorField:
    """factor * b(lam x) on the grid with lam times more points per axis.

    Coefficient k moves to lam * k unchanged; the coarse Nyquist planes have
    no Hermitian partner and are dropped.
    """
    g = b.grid
    fine = Grid(g.d, g.n * lam)
    ks = np.fft.fftfreq(g.n, 1.0 / g.n).astype(int)
    keep = np.abs(ks) < g.n // 2
    src = np.nonzero(keep)[0]
    dst = (ks[keep] * lam) % fine.n
    full = b.full_spectrum()
    out = np.zeros((b.ncomp,) + (fine.n,) * g.d, dtype=complex)
    out[(slice(None), *np.ix_(*[dst] * g.d))] = full[(slice(None), *np.ix_(*[src] * g.d))]
    return SpectralVectorField(fine, half_spectrum(fine, out) * factor)


def _scaling(spec: ExperimentSpec) -> dict:
    base, lam = spec.base, spec.lam
    a = base.alpha + base.beta - 1.0
    time_factor = float(lam) ** (-2.0 * base.beta)
    coarse = run(base, keep_fields=True)
    b0 = coarse.fields[0]
    fine_params = dataclasses.replace(
        base,
        n=base.n * lam,
        t_end=base.t_end * time_factor,
        dt=None if base.dt is None else base.dt * time_factor,
        dt_max=base.dt_max * time_factor,
    )
    fine = run(fine_params, b0=embed(b0, lam, lam**a), keep_fields=True)
    if len(fine.times) != len(coarse.times):
        raise ConfigurationError("coarse and rescaled runs sampled different numbers of times")
    mismatch = []
    for fc, ff in zip(coarse.fields, fine.fields):
        ref = embed(fc, lam, lam**a)
        scale = l2_norm(ref)
        mismatch.append(l2_norm(ff - ref) / scale if scale > 0 else l2_norm(ff))
    return {
        "lambda": lam,
        "exponent": a,
        "coarse_n": base.n,
        "fine_n": base.n * lam,
        "times_fine": [t * time_factor for t in coarse.times],
        "mismatch": mismatch,
        "max_mismatch": max(mismatch),
        "status": [coarse.status, fine.status],
    }


def _decay_probe(spec: ExperimentSpec) -> dict:
    rep = classify(spec.base.d, spec.base.alpha, spec.base.beta)
    params = dataclasses.replace(spec.base, lp=rep.p)
    theta = params.d / (2 * params.beta) * (1 / spec.s_low - 1 / rep.p)
    traj = run(params)
    series = [t**theta * r.b_Lp for t, r in zip(traj.times, traj.records)]
    return {
        "s_low": spec.s_low,
        "p": rep.p,
        "theta": theta,
        "times": traj.times,
        "series": series,
        "max": max(series),
        "status": traj.status,
    }


def _logsob(spec: ExperimentSpec) -> dict:
    d = spec.base.d
    grid = Grid(d, spec.logsob_n)
    s = d / 2 + 1
    rows = []
    for N in spec.logsob_N:
        f = log_sobolev_family(grid, N)
        rows.append({
            "N": N,
            "ratio": log_sobolev_check(f, s),
            "cs_bound": cauchy_schwarz_linf_bound(grid, N),
        })
    return {"s": s, "n": spec.logsob_n, "rows": rows, "max_ratio": max(r["ratio"] for r in rows)}


def _crossing_time(times, values, threshold) -> Optional[float]:
    for i in range(1, len(values)):
        if values[i] >= threshold:
            v0, v1 = values[i - 1], values[i]
            return times[i - 1] + (threshold - v0) / (v1 - v0) * (times[i] - times[i - 1])
    return None


def _amplitude(spec: ExperimentSpec) -> dict:
    base = spec.base
    b_unit = make_initial(base.initial_condition(), base.grid)
    rows = []
    for amp in spec.amplitudes:
        params = dataclasses.replace(
            base,
            t_end=base.t_end / amp**2,
            dt=None if base.dt is None else base.dt / amp**2,
            dt_max=base.dt_max / amp**2,
        )
        traj = run(params, b0=b_unit * amp)
        hs = [r.b_Hs for r in traj.records]
        t_valid = _crossing_time(traj.times, hs, spec.growth_factor * hs[0])
        rows.append({"amplitude": amp, "validity_time": t_valid, "status": traj.status})
    found = [(r["amplitude"], r["validity_time"]) for r in rows if r["validity_time"]]
    fit = None
    if len(found) >= 2:
        x = np.log([f[0] for f in found])
        y = np.log([f[1] for f in found])
        slope, intercept = np.polyfit(x, y, 1)
        fit = {"exponent": float(slope), "prefactor": float(math.exp(intercept))}
    return {"growth_factor": spec.growth_factor, "rows": rows, "fit": fit}


def _picard_cross(spec: ExperimentSpec) -> dict:
    base = spec.base
    cfg = PicardConfig.for_regime(base.d, base.alpha, base.beta, base.t_end, spec.picard_points)
    b0 = make_initial(base.initial_condition(), base.grid)
    res = picard_solve(b0, cfg, base)
    stepped = integrate_to(base, b0, res.trajectory.times)
    scale = l2_norm(b0)
    disc = [l2_norm(a - b) / scale for a, b in zip(res.trajectory.fields, stepped)]
    return {
        "iterations": res.iterations,
        "converged": res.converged,
        "contraction_ratio": res.contraction_ratio,
        "distances": res.distances,
        "max_discrepancy": max(disc),
        "p": cfg.p,
        "q": cfg.q,
        "sigma": cfg.sigma,
    }
