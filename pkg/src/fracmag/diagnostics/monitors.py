"""Read-only checks over a finished trajectory."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientSamples
from .records import RecordBuilder, energy_change

FINITE = "Finite"
GROWING_FAST = "GrowingFast"


@dataclass
class ResidualSeries:
    times: np.ndarray  # interval midpoints
    values: np.ndarray

    @property
    def max(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))


def energy_balance_residual(traj, params) -> ResidualSeries:
    """dM/dt + nu ||Lambda^alpha u||^2 + eta ||Lambda^beta b||^2 per sample interval.

    Uses stored fields when the trajectory kept them, otherwise the values
    recorded during the run (which were computed the same way).
    """
    times = np.asarray(traj.times, dtype=float)
    if len(times) < 2:
        raise InsufficientSamples("need at least two samples")
    mids = 0.5 * (times[1:] + times[:-1])
    if traj.fields is None:
        return ResidualSeries(mids, np.array([r.energy_residual for r in traj.records[1:]]))
    builder = RecordBuilder(params.grid, params.alpha, params.beta, params.nu, params.eta,
                            params.s, params.lp)
    vals = []
    for i in range(len(times) - 1):
        a, b = traj.fields[i].coeffs, traj.fields[i + 1].coeffs
        dM = energy_change(params.grid, a, b)
        vals.append(dM / (times[i + 1] - times[i]) + builder.dissipation(0.5 * (a + b)))
    return ResidualSeries(mids, np.array(vals))


def continuation_monitor(traj_or_times, values=None) -> tuple[float, str]:
    """Trapezoid integral of ||u||_{Hdot^{d/2+1}} and an advisory growth verdict.

    Accepts a trajectory, or explicit ``(times, values)`` arrays.  The verdict
    is GrowingFast when the last quarter of the time window carries more than
    half of the integral and the integrand is still accelerating there.
    """
    if values is None:
        times = np.asarray(traj_or_times.times, dtype=float)
        vals = np.array([r.u_Hd2p1 for r in traj_or_times.records])
    else:
        times = np.asarray(traj_or_times, dtype=float)
        vals = np.asarray(values, dtype=float)
    if len(times) < 2:
        return 0.0, FINITE
    pieces = 0.5 * np.diff(times) * (vals[1:] + vals[:-1])
    total = float(np.sum(pieces))
    if total <= 0:
        return total, FINITE
    t_q = times[0] + 0.75 * (times[-1] - times[0])
    late = times[1:] > t_q
    late_share = float(np.sum(pieces[late])) / total
    tail = vals[times >= t_q]
    accelerating = False
    if len(tail) >= 3:
        inc = np.diff(tail)
        accelerating = bool(np.all(inc > 0) and inc[-1] > inc[0])
    verdict = GROWING_FAST if late_share > 0.5 and accelerating else FINITE
    return total, verdict


def energy_budget_slack(traj) -> float:
    """min over samples of (||b_0||^2 - 2 nu int_0^t ||u||^2_{Hdot^alpha}) / ||b_0||^2."""
    m0 = 2.0 * traj.records[0].M
    if m0 == 0:
        return 0.0
    nu = traj.params.nu
    return float(min((m0 - 2.0 * nu * x) / m0 for x in traj.dissipation_integral))
