import math
from dataclasses import replace

import numpy as np
import pytest

from presto import load_scenario, run_scenario
from presto.controller import SatBounds
from presto.harness import (
    DivergenceError,
    Scenario,
    compare_controllers,
    export_trace,
    read_trace,
)
from presto.mathcore import Trace, l2_norm, linf_norm
from presto.observer import ObserverState, z_derivative
from presto.plant import DisturbanceSpec, PlantParams


def zero_scenario():
    base = load_scenario("s71")
    return replace(
        base,
        x0=(0.0, 0.0),
        disturbance=DisturbanceSpec(),
        horizon=0.7,
        decimation=1,
    )


class TestRunScenario:
    def test_equilibrium_stays_at_rest(self):
        trace, report = run_scenario(zero_scenario())
        for name in ("x1", "x2", "u", "d_hat", "s", "s2"):
            assert linf_norm(trace, name) == 0.0, name
        assert report.t_s == 0.0

    def test_expected_columns(self, bundled_runs):
        _, trace, _, _ = bundled_runs["s71"]
        assert set(trace.columns) >= {"t", "x1", "x2", "u", "d", "d_hat", "s", "s2"}
        _, trace72, _, _ = bundled_runs["s72"]
        assert set(trace72.columns) >= {"v_r", "u_c"}
        _, trace73, _, _ = bundled_runs["s73"]
        assert set(trace73.columns) >= {"x1_hat", "x2_hat", "K1_hat", "e_x", "innov", "P_trace"}
        _, trace74, _, _ = bundled_runs["s74"]
        assert set(trace74.columns) >= {"s", "u_eq", "u_c"}

    def test_observer_wiring_identity(self, bundled_runs):
        # d_hat - (zdot - g(x)u) must reproduce -f(x) at every logged sample
        sc, trace, _, _ = bundled_runs["s71"]
        s = trace.column("s")
        x1 = trace.column("x1")
        u = trace.column("u")
        d_hat = trace.column("d_hat")
        for i in range(0, trace.n_samples, 97):
            fx = -sc.plant.K1 * x1[i] - sc.plant.K2 * x1[i] ** 3
            st = ObserverState(z=0.0, s=float(s[i]), d_hat=0.0)
            forcing = -sc.plant.g * u[i]
            zdot = z_derivative(st, fx, forcing, sc.observer)
            assert d_hat[i] - (zdot - forcing) == pytest.approx(-fx, rel=1e-9, abs=1e-9)

    def test_report_matches_exported_csv(self, bundled_runs, tmp_path):
        _, trace, report, _ = bundled_runs["s72"]
        path = tmp_path / "s72.csv"
        export_trace(trace, path)
        back = read_trace(path)
        assert l2_norm(back, "u") == pytest.approx(report.u_l2, rel=1e-10)
        assert linf_norm(back, "u") == pytest.approx(report.u_linf, rel=1e-10)
        assert l2_norm(back, "x1") == pytest.approx(report.ey_l2, rel=1e-10)
        assert linf_norm(back, "x1") == pytest.approx(report.ey_linf, rel=1e-10)
        assert l2_norm(back, "u_c") == pytest.approx(report.uc_l2, rel=1e-10)

    def test_step_halving_stability(self):
        # validates the default integration step at the default band
        base = load_scenario("s71")
        coarse = replace(base, threshold_fraction=0.02)
        fine = replace(base, threshold_fraction=0.02, dt=5e-5, decimation=20)
        _, rc = run_scenario(coarse)
        _, rf = run_scenario(fine)
        assert rc.t_s is not None and rf.t_s is not None
        assert abs(rf.t_s - rc.t_s) / rc.t_s < 0.02
        assert abs(rf.ey_linf - rc.ey_linf) / rc.ey_linf < 0.01

    def test_tighter_clamp_never_settles_faster(self, bundled_runs):
        sc, _, base_report, _ = bundled_runs["s72"]
        tight = replace(sc, tsmc=replace(sc.tsmc, sat=SatBounds(-30.0, 5.0)))
        _, tight_report = run_scenario(tight)
        base_ts = base_report.t_s if base_report.t_s is not None else math.inf
        tight_ts = tight_report.t_s if tight_report.t_s is not None else math.inf
        assert tight_ts >= base_ts

    def test_rk4_truth_option_agrees(self):
        base = load_scenario("s71")
        short = replace(base, horizon=1.0)
        _, euler_report = run_scenario(short)
        _, rk4_report = run_scenario(replace(short, integrator="rk4"))
        assert rk4_report.ey_linf == pytest.approx(euler_report.ey_linf, rel=0.02)

    def test_smooth_switching_option_runs(self):
        base = load_scenario("s71")
        sc = replace(base, observer=replace(base.observer, smooth_sgn_width=1e-3),
                     horizon=1.0)
        _, report = run_scenario(sc)
        assert report.ey_linf < 1.2

    def test_divergence_raises_with_partial_trace(self):
        # unstable spring under a clamp far too weak to hold it
        base = load_scenario("s72")
        bad = replace(
            base,
            plant=PlantParams(K1=-50.0, K2=-19.97, g=-1.09),
            tsmc=replace(base.tsmc, sat=SatBounds(-0.1, 0.1)),
            horizon=4.0,
        )
        with pytest.raises(DivergenceError) as exc:
            run_scenario(bad)
        err = exc.value
        assert err.trace.n_samples > 0
        assert err.peak > 1e6 or math.isinf(err.peak)

    def test_process_noise_needs_ekf(self):
        base = load_scenario("s71")
        with pytest.raises(ValueError, match="process_noise"):
            replace(base, process_noise=True)

    def test_disturbance_bound_violation_is_diagnosed(self):
        from presto.plant import DisturbanceTerm

        base = load_scenario("s71")
        loud = DisturbanceSpec(terms=(DisturbanceTerm(10.0, "sin_linear", 0.4),))
        sc = replace(base, disturbance=loud, horizon=1.0)
        with pytest.warns(RuntimeWarning, match="beta0"):
            _, report = run_scenario(sc)
        assert report.diagnostics

    def test_compliant_disturbance_stays_quiet(self, bundled_runs):
        _, _, report, _ = bundled_runs["s71"]
        assert report.diagnostics == []


class TestScenarioValidation:
    def test_kind_checked(self):
        base = load_scenario("s71")
        with pytest.raises(ValueError, match="kind"):
            replace(base, kind="pid")

    def test_adaptive_requires_aligned_sample_time(self):
        base = load_scenario("s73")
        with pytest.raises(ValueError, match="multiple"):
            replace(base, ekf=replace(base.ekf, Ts=2.5e-4))

    def test_smc_needs_nominal(self):
        base = load_scenario("s74")
        with pytest.raises(ValueError, match="nominal"):
            replace(base, smc_k1_nominal=None)


class TestCompare:
    def test_failed_row_does_not_poison_others(self, tmp_path):
        good = replace(load_scenario("s71"), horizon=1.0)
        sat_base = load_scenario("s72")
        bad = replace(
            sat_base,
            plant=PlantParams(K1=-50.0, K2=-19.97, g=-1.09),
            tsmc=replace(sat_base.tsmc, sat=SatBounds(-0.1, 0.1)),
            horizon=4.0,
        )
        reports, text = compare_controllers(
            [("good", good), ("bad", bad)], out_dir=tmp_path
        )
        assert reports[0].failed is None
        assert reports[1].failed is not None
        assert "FAILED" in text
        assert (tmp_path / "good.csv").exists()
        assert (tmp_path / "bad.csv").exists()  # partial trace still exported


class TestTraceFiles:
    def test_round_trip_precision(self, tmp_path):
        rng = np.random.default_rng(61)
        tr = Trace(
            dt=1e-3,
            columns={
                "t": np.arange(50) * 1e-3,
                "x1": rng.normal(scale=123.0, size=50),
                "x2": rng.normal(scale=1e-6, size=50),
            },
        )
        path = tmp_path / "trip.csv"
        export_trace(tr, path)
        back = read_trace(path)
        for name in ("t", "x1", "x2"):
            a, b = tr.column(name), back.column(name)
            assert np.all(np.abs(a - b) <= 1e-10 * np.maximum(np.abs(a), 1e-300))

    def test_header_only_for_empty_trace(self, tmp_path):
        path = tmp_path / "empty.csv"
        export_trace(Trace(dt=1.0, columns={}), path)
        assert path.read_text() == "\n"

    def test_time_column_leads(self, tmp_path):
        tr = Trace(dt=0.5, columns={"x1": [1.0, 2.0], "t": [0.0, 0.5]})
        path = tmp_path / "order.csv"
        export_trace(tr, path)
        assert path.read_text().splitlines()[0].startswith("t,")
        assert read_trace(path).dt == pytest.approx(0.5)
