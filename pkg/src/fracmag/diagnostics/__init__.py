"""Energy, helicity and continuation diagnostics plus the numerical experiments."""

from .monitors import continuation_monitor, energy_balance_residual, energy_budget_slack
from .records import RECORD_KEYS, DiagnosticsRecord, RecordBuilder, magnetic_helicity


def run_experiment(spec):
    # imported lazily: the experiments drive the stepper, which imports this package
    from .experiments import run_experiment as _run

    return _run(spec)


__all__ = [
    "RECORD_KEYS",
    "DiagnosticsRecord",
    "RecordBuilder",
    "continuation_monitor",
    "energy_balance_residual",
    "energy_budget_slack",
    "magnetic_helicity",
    "run_experiment",
]
