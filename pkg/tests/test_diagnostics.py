"""Helicity, energy balance, continuation monitor and the experiment drivers."""

import math

import numpy as np
import pytest

from fracmag.diagnostics import (
    RecordBuilder,
    continuation_monitor,
    energy_balance_residual,
    energy_budget_slack,
    magnetic_helicity,
    run_experiment,
)
from fracmag.diagnostics.experiments import ExperimentSpec, _crossing_time, decay_window, embed
from fracmag.diagnostics.monitors import FINITE, GROWING_FAST
from fracmag.diagnostics.records import energy_change
from fracmag.errors import ConfigurationError, InsufficientSamples, WrongDimension
from fracmag.evolve import SimParams, run
from fracmag.fields import (
    ABC,
    Lp,
    OrszagTangLike,
    RandomBandLimited,
    SingleMode,
    Zero,
    make_initial,
    norm,
    random_field,
)
from fracmag.spectral import Grid, SpectralVectorField

TWO_PI = 2 * math.pi
SHEAR = SingleMode((0, 1), (1.0, 0.0))


class TestHelicity:
    def test_abc_value(self):
        b = make_initial(ABC(1, 1, 1), Grid(3, 16))
        assert magnetic_helicity(b) == pytest.approx(3 * TWO_PI**3, rel=1e-13)
        assert magnetic_helicity(b) == pytest.approx(norm(b, Lp(2)) ** 2, rel=1e-13)

    def test_mirror_symmetric_field(self):
        g = Grid(3, 16)
        x1, x2, x3 = g.coords()
        b = SpectralVectorField.from_physical(
            g, np.stack([np.cos(x2) + np.cos(x3), np.cos(x3), np.cos(x1)])
        )
        assert b.is_divergence_free()
        assert abs(magnetic_helicity(b)) < 1e-12

    def test_quadratic_scaling(self):
        g = Grid(3, 12)
        b = random_field(g, np.random.default_rng(0), 3)
        h = magnetic_helicity(b)
        assert magnetic_helicity(b * -2.5) == pytest.approx(6.25 * h, rel=1e-12)

    def test_needs_three_dimensions(self):
        with pytest.raises(WrongDimension):
            magnetic_helicity(SpectralVectorField.zeros(Grid(2, 8)))

    def test_arnold_margin_for_beltrami(self):
        g = Grid(3, 16)
        b = make_initial(ABC(), g)
        rec = RecordBuilder(g, 2.5, 1.0, 1.0, 0.0, 1.0, 2.0).sample(0.0, b.coeffs)
        assert rec.M == pytest.approx(abs(rec.H) / 2, rel=1e-12)
        assert abs(rec.arnold_margin) < 1e-12 * rec.M


class TestRecords:
    def test_zero_record(self):
        g = Grid(2, 8)
        rb = RecordBuilder(g, 1.0, 1.0, 1.0, 0.0, 1.0, 2.0)
        z = np.zeros((2, *g.spectral_shape), dtype=complex)
        rb.sample(0.0, z)
        rec = rb.sample(0.1, z)
        for key, value in rec.to_dict().items():
            if key != "t":
                assert value in (0.0, None), key

    def test_energy_change_matches_difference(self):
        g = Grid(2, 16)
        rng = np.random.default_rng(1)
        a, b = random_field(g, rng, 5).coeffs, random_field(g, rng, 5).coeffs
        ma = 0.5 * norm(SpectralVectorField(g, a), Lp(2)) ** 2
        mb = 0.5 * norm(SpectralVectorField(g, b), Lp(2)) ** 2
        assert energy_change(g, a, b) == pytest.approx(mb - ma, rel=1e-12)


class TestEnergyBalance:
    def test_stationary_zero(self):
        p = SimParams(n=16, t_end=0.05, dt=0.01, ic=Zero())
        tr = run(p, keep_fields=True)
        assert energy_balance_residual(tr, p).max == 0.0

    def test_single_mode_midpoint_error(self):
        p = SimParams(n=16, t_end=0.4, dt=0.1, eta=1.0, ic=SHEAR)
        tr = run(p, keep_fields=True)
        res = energy_balance_residual(tr, p)
        m0 = TWO_PI**2 / 2  # ||b0||^2
        expected = []
        for t0, t1 in zip(tr.times, tr.times[1:]):
            h = t1 - t0
            dM = 0.5 * m0 * (math.exp(-2 * t1) - math.exp(-2 * t0)) / h
            mid = 0.5 * (math.exp(-t0) + math.exp(-t1))
            expected.append(dM + m0 * mid**2)
        assert np.allclose(res.values, expected, rtol=1e-10, atol=1e-14)
        # midpoint rule error h^2/12 * (second derivative) scale: positive and O(h^2)
        assert all(v > 0 for v in expected)

    def test_recorded_residual_matches_fields(self):
        p = SimParams(n=16, t_end=0.2, dt=0.02, eta=0.3, ic=RandomBandLimited(1, 4, 2, 1.0, 1))
        tr = run(p, keep_fields=True)
        from_fields = energy_balance_residual(tr, p)
        tr.fields = None
        from_records = energy_balance_residual(tr, p)
        assert np.allclose(from_fields.values, from_records.values, rtol=0, atol=1e-15)

    def test_second_order_under_refinement(self):
        base = dict(n=32, alpha=2.0, t_end=0.8, ic=RandomBandLimited(1, 4, 0, 1.0, 1))
        maxima = []
        for dt in (0.2, 0.1, 0.05):
            p = SimParams(dt=dt, **base)
            maxima.append(energy_balance_residual(run(p), p).max)
        assert 3.5 < maxima[0] / maxima[1] < 4.5
        assert 3.5 < maxima[1] / maxima[2] < 4.5

    def test_needs_two_samples(self):
        p = SimParams(n=16, t_end=0.01, dt=0.01, ic=SHEAR)
        tr = run(p)
        tr.times = tr.times[:1]
        with pytest.raises(InsufficientSamples):
            energy_balance_residual(tr, p)

    def test_budget_slack_nonnegative(self):
        p = SimParams(n=16, t_end=0.5, dt=0.01, ic=RandomBandLimited(1, 4, 3, 2.0, 0))
        tr = run(p)
        assert energy_budget_slack(tr) >= -1e-8
        assert energy_budget_slack(tr) < 1.0


class TestContinuationMonitor:
    def test_zero_velocity(self):
        t = np.linspace(0, 1, 11)
        assert continuation_monitor(t, np.zeros_like(t)) == (0.0, FINITE)

    def test_bounded_series(self):
        t = np.linspace(0, 1, 101)
        total, verdict = continuation_monitor(t, 1 + 0.1 * np.sin(t))
        assert verdict == FINITE
        assert total == pytest.approx(1 + 0.1 * (1 - math.cos(1)), rel=1e-4)

    def test_manufactured_singularity(self):
        t = np.linspace(0, 0.999, 1000)
        total, verdict = continuation_monitor(t, (1 - t) ** -0.9)
        assert verdict == GROWING_FAST
        assert total > 0

    def test_from_trajectory(self):
        p = SimParams(n=16, t_end=0.1, dt=0.01, ic=SHEAR)
        assert continuation_monitor(run(p)) == (0.0, FINITE)


class TestExperiments:
    def test_spec_validation(self):
        base = SimParams(n=16, eta=1.0)
        with pytest.raises(ConfigurationError):
            ExperimentSpec("Bogus", base)
        with pytest.raises(ConfigurationError):
            ExperimentSpec("Scaling", base, lam=1.5)
        with pytest.raises(ConfigurationError):
            ExperimentSpec("AmplitudeSweep", base, amplitudes=(1.0,))

    def test_decay_window_rejects_outside(self):
        base = SimParams(n=16, eta=1.0)
        lo, hi = decay_window(base)
        with pytest.raises(ConfigurationError):
            ExperimentSpec("DecayProbe", base, s_low=1 / lo)
        with pytest.raises(ConfigurationError):
            ExperimentSpec("DecayProbe", base, s_low=2 / (lo + hi) / 4)
        ExperimentSpec("DecayProbe", base, s_low=2 / (lo + hi))

    def test_embed(self):
        g = Grid(2, 8)
        b = make_initial(SingleMode((1, 2), (2.0, -1.0)), g)
        fine = embed(b, 2, 3.0)
        assert fine.grid == Grid(2, 16)
        x1, x2 = fine.grid.coords()
        ref = 3.0 * np.stack([2.0 * np.sin(2 * x1 + 4 * x2), -np.sin(2 * x1 + 4 * x2)])
        assert np.max(np.abs(fine.physical() - ref)) < 1e-13

    def test_scaling_on_shear(self):
        base = SimParams(n=16, eta=1.0, t_end=0.2, dt=0.02, ic=SHEAR)
        rep = run_experiment(ExperimentSpec("Scaling", base))
        assert rep["max_mismatch"] <= 1e-12
        assert rep["fine_n"] == 32

    def test_scaling_nonlinear(self):
        base = SimParams(n=16, eta=1.0, t_end=0.2, dt=0.02, ic=RandomBandLimited(1, 3, 1, 0.5, 0))
        rep = run_experiment(ExperimentSpec("Scaling", base))
        assert rep["max_mismatch"] <= 1e-10

    def test_decay_probe(self):
        base = SimParams(n=16, eta=1.0, t_end=1.0, dt=0.02, sample_every=5,
                         ic=RandomBandLimited(1, 3, 1, 0.2, 0))
        lo, hi = decay_window(base)
        rep = run_experiment(ExperimentSpec("DecayProbe", base, s_low=2 / (lo + hi)))
        assert rep["status"] == "Completed"
        assert math.isfinite(rep["max"])

    def test_logsob(self):
        rep = run_experiment(ExperimentSpec("LogSobolevSweep", SimParams(), logsob_N=(4, 8),
                                            logsob_n=64))
        assert len(rep["rows"]) == 2
        for row in rep["rows"]:
            assert 0 < row["ratio"] < row["cs_bound"]

    def test_amplitude_sweep_structure(self):
        base = SimParams(n=16, alpha=0.0, s=3.0, t_end=0.8, dt=5e-3, ic=OrszagTangLike())
        rep = run_experiment(ExperimentSpec("AmplitudeSweep", base, amplitudes=(1.0, 2.0),
                                            growth_factor=1.2))
        assert [r["amplitude"] for r in rep["rows"]] == [1.0, 2.0]
        assert all(r["validity_time"] for r in rep["rows"])
        # at alpha = 0 and eta = 0 the amplitude rescales time exactly by 1/A^2
        assert rep["fit"]["exponent"] == pytest.approx(-2.0, abs=1e-6)

    def test_crossing_time(self):
        assert _crossing_time([0, 1, 2], [1, 2, 4], 3) == pytest.approx(1.5)
        assert _crossing_time([0, 1], [1, 1], 2) is None

    def test_picard_cross(self):
        base = SimParams(n=16, eta=1.0, t_end=0.05, dt=1e-3, ic=RandomBandLimited(1, 3, 0, 0.5, 0))
        rep = run_experiment(ExperimentSpec("PicardCross", base, picard_points=16))
        assert rep["converged"]
        assert rep["max_discrepancy"] <= 1e-4
