"""Simulation tests: vector field, integrator, and measurements."""

import math

import numpy as np
import pytest

from cyclonet.model import NetworkModel, OscillatorParams, build_laplacian, generate_topology
from cyclonet.sim import (
    IntegrationError,
    SimConfig,
    Trajectory,
    equilibrium_state,
    export_trajectory_csv,
    integrate,
    measure_period,
    measure_sync,
    rhs,
    run_simulation,
    step_halving_audit,
    summarize,
)


def make_net(b=(0.5,) * 9, p=3.0, n=9, k=2, seed=42, weight_range=(0.0, 20.0)):
    osc = OscillatorParams(b=b, p=p)
    if n == 1:
        lap = build_laplacian(np.zeros((1, 1)))
    else:
        lap = build_laplacian(generate_topology("random", n, seed=seed, weight_range=weight_range))
    return NetworkModel(osc=osc, coupling=lap, k=k)


def synthetic_trajectory(period=7.0, dt=0.01, t_end=200.0, mean=2.0):
    t = np.arange(0.0, t_end + dt / 2, dt)
    x = mean + np.sin(2.0 * np.pi * t / period)
    return Trajectory(
        times=t,
        x_end=x[:, None],
        states=None,
        dt=dt,
        transient_fraction=0.5,
        oscillation_rel_threshold=1e-3,
    )


class TestRhs:
    def test_zero_at_equilibrium(self):
        net = make_net()
        eq = equilibrium_state(net.osc)
        state = np.tile(eq[:, None], (1, net.N))
        assert np.max(np.abs(rhs(net, state))) < 1e-10

    def test_single_oscillator_form(self):
        net = make_net(n=1)
        rng = np.random.default_rng(0)
        x = rng.uniform(0.1, 5.0, (9, 1))
        out = rhs(net, x)
        b = np.asarray(net.osc.b)
        expected = np.empty_like(x)
        expected[0, 0] = 1.0 / (1.0 + x[-1, 0] ** 3) - b[0] * x[0, 0]
        for m in range(1, 9):
            expected[m, 0] = x[m - 1, 0] - b[m] * x[m, 0]
        assert out == pytest.approx(expected, abs=1e-14)

    def test_coupling_row_only(self):
        # the diffusive term acts on row k-1 alone and vanishes on the diagonal
        net = make_net(n=4, seed=9)
        rng = np.random.default_rng(1)
        col = rng.uniform(0.1, 5.0, (9, 1))
        state = np.tile(col, (1, 4))
        decoupled = make_net(n=1)
        single = rhs(decoupled, col)
        out = rhs(net, state)
        assert out == pytest.approx(np.tile(single, (1, 4)), abs=1e-12)

    def test_flow_consistency_richardson(self):
        # one integrator step satisfies (flow(h) - x)/h = rhs + O(h)
        net = make_net(n=9, seed=42)
        rng = np.random.default_rng(42)
        x = rng.uniform(0.0, 10.0, (9, 9))
        f = rhs(net, x)
        errs = []
        for h in (1e-3, 5e-4):
            cfg = SimConfig(t_end=2 * h, dt=h, initial_state=x, record_stride=1, record_full=True)
            traj = integrate(net, cfg)
            approx = (traj.states[1] - x) / h  # state after exactly one step
            errs.append(np.max(np.abs(approx - f)))
        assert errs[1] < 0.6 * errs[0]  # first-order fall-off


class TestIntegrate:
    def test_equilibrium_stays_fixed(self):
        net = make_net()
        eq = equilibrium_state(net.osc)
        state = np.tile(eq[:, None], (1, net.N))
        cfg = SimConfig(t_end=100.0, initial_state=state, record_full=True)
        traj = integrate(net, cfg)
        assert np.max(np.abs(traj.states - state)) < 1e-8

    def test_stable_regime_converges(self):
        net = make_net(b=(1.0,) * 9)
        traj = integrate(net, SimConfig(t_end=2000.0, seed=7))
        _, late = traj.times, traj.x_end[len(traj.x_end) // 2 :, 0]
        assert late.max() - late.min() < 1e-3

    def test_oscillatory_regime_sustained_and_bounded(self):
        net = make_net(b=(0.5,) * 9)
        traj = integrate(net, SimConfig(t_end=2000.0, seed=7, record_full=True))
        late = traj.x_end[len(traj.x_end) // 2 :, 0]
        assert late.max() - late.min() > 1.0
        assert np.isfinite(traj.states).all()

    def test_nonnegativity(self):
        for seed in range(5):
            net = make_net(b=(0.6,) * 9, n=5, seed=seed)
            traj = integrate(net, SimConfig(t_end=300.0, seed=seed, record_full=True))
            assert traj.states.min() >= -1e-9

    def test_boundedness_random_runs(self):
        # crude a priori bound: row 1 settles under max(x1(0), 1/b1) and each
        # later row under the previous bound over its own rate
        rng = np.random.default_rng(3)
        for trial in range(10):
            b = tuple(rng.uniform(0.4, 1.2, 9))
            net = make_net(b=b, n=4, seed=trial)
            cfg = SimConfig(t_end=200.0, seed=trial, record_full=True)
            traj = integrate(net, cfg)
            x0max = traj.states[0].max()
            bound = max(x0max, 1.0 / b[0])
            for bm in b[1:]:
                bound = max(x0max, bound / bm)
            assert traj.states.max() <= 1.05 * bound

    def test_fourth_order_convergence(self):
        net = make_net(n=3, seed=5, weight_range=(0.0, 2.0))
        rng = np.random.default_rng(5)
        x = rng.uniform(0.5, 5.0, (9, 3))

        def end_state(dt):
            cfg = SimConfig(t_end=10.0, dt=dt, initial_state=x, record_stride=int(10.0 / dt))
            return integrate(net, cfg).x_end[-1]

        ref = end_state(0.00125)
        err1 = np.max(np.abs(end_state(0.02) - ref))
        err2 = np.max(np.abs(end_state(0.01) - ref))
        assert err1 / err2 == pytest.approx(16.0, rel=0.5)

    def test_step_audit_on_smooth_run(self):
        net = make_net(n=3, seed=5, weight_range=(0.0, 2.0))
        cfg = SimConfig(t_end=50.0, dt=0.01, seed=5)
        assert step_halving_audit(net, cfg) < 1e-5

    def test_blowup_raises_with_time(self):
        net = make_net(n=3, seed=5, weight_range=(900.0, 1000.0))
        cfg = SimConfig(t_end=50.0, dt=1.0, seed=0)  # far beyond the stability limit
        with pytest.raises(IntegrationError) as err:
            integrate(net, cfg)
        assert err.value.time > 0.0

    def test_initial_state_validation(self):
        net = make_net(n=2)
        with pytest.raises(ValueError, match="shape"):
            integrate(net, SimConfig(t_end=10.0, initial_state=np.ones((3, 2))))
        with pytest.raises(ValueError, match="nonnegative"):
            integrate(net, SimConfig(t_end=10.0, initial_state=-np.ones((9, 2))))


class TestMeasurements:
    def test_synthetic_sine_period(self):
        traj = synthetic_trajectory(period=7.0)
        period, stderr = measure_period(traj)
        assert period == pytest.approx(7.0, abs=0.01)
        assert stderr < 0.01

    def test_flat_signal_has_no_period(self):
        traj = synthetic_trajectory()
        traj.x_end[:] = 2.0
        assert measure_period(traj) is None

    def test_too_few_cycles_absent(self):
        traj = synthetic_trajectory(period=7.0, t_end=40.0)  # under 5 cycles after cut
        assert measure_period(traj) is None

    def test_identical_initial_conditions_stay_synchronized(self):
        net = make_net(n=4, seed=2)
        rng = np.random.default_rng(2)
        col = rng.uniform(0.0, 100.0, (9, 1))
        cfg = SimConfig(t_end=400.0, initial_state=np.tile(col, (1, 4)))
        traj = integrate(net, cfg)
        sync_error, synchronized = measure_sync(traj)
        assert synchronized
        assert sync_error < 1e-9

    def test_strong_pair_coupling_synchronizes(self):
        lap = build_laplacian([[0.0, 500.0], [500.0, 0.0]])
        net = NetworkModel(osc=OscillatorParams(b=(0.5,) * 9, p=3.0), coupling=lap, k=2)
        traj = integrate(net, SimConfig(t_end=600.0, dt=0.002, seed=11))
        sync_error, synchronized = measure_sync(traj)
        assert synchronized, f"sync_error={sync_error}"

    def test_decoupled_oscillators_drift_apart(self):
        net = make_net(n=3, weight_range=(0.0, 0.0))
        traj = integrate(net, SimConfig(t_end=600.0, seed=13))
        sync_error, synchronized = measure_sync(traj)
        assert not synchronized
        assert sync_error > 1e-2

    def test_sync_needs_two_oscillators(self):
        net = make_net(n=1)
        traj = integrate(net, SimConfig(t_end=50.0, seed=0))
        with pytest.raises(ValueError, match="two oscillators"):
            measure_sync(traj)

    def test_summarize_fields(self):
        net = make_net()
        traj, result = run_simulation(net, SimConfig(t_end=2000.0, seed=12345))
        assert result.oscillatory
        assert result.measured_period == pytest.approx(40.9, rel=0.02)
        assert result.synchronized
        assert len(result.amplitude_mean) == 9
        assert len(result.amplitude_ptp) == 9
        assert result.measured_period is not None and result.period_stderr >= 0.0

    def test_network_period_matches_single_oscillator(self):
        # collective period of the synchronized run equals the autonomous one
        cfg = SimConfig(t_end=2000.0, seed=4)
        _, coupled = run_simulation(make_net(b=(0.7,) * 9), cfg)
        _, single = run_simulation(make_net(b=(0.7,) * 9, n=1), cfg)
        assert coupled.measured_period == pytest.approx(single.measured_period, rel=1e-3)


class TestExport:
    def test_csv_round_trip(self, tmp_path):
        traj = synthetic_trajectory(t_end=5.0)
        path = tmp_path / "traj.csv"
        export_trajectory_csv(traj, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "t,xM_1"
        assert len(lines) == len(traj.times) + 1
        t0, x0 = lines[1].split(",")
        assert float(t0) == 0.0
        assert float(x0) == pytest.approx(traj.x_end[0, 0], rel=1e-5)

    def test_csv_channel_selection(self, tmp_path):
        net = make_net(n=3, seed=1)
        traj = integrate(net, SimConfig(t_end=10.0, seed=1))
        path = tmp_path / "traj.csv"
        export_trajectory_csv(traj, path, channels=[2, 3])
        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header == "t,xM_2,xM_3"
        with pytest.raises(ValueError, match="out of range"):
            export_trajectory_csv(traj, path, channels=[4])

    def test_deterministic_bytes(self, tmp_path):
        net = make_net(n=2, seed=3)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        export_trajectory_csv(integrate(net, SimConfig(t_end=20.0, seed=3)), a)
        export_trajectory_csv(integrate(net, SimConfig(t_end=20.0, seed=3)), b)
        assert a.read_bytes() == b.read_bytes()


class TestConfigValidation:
    def test_bad_values_rejected(self):
        with pytest.raises(ValueError, match="dt"):
            SimConfig(dt=0.0)
        with pytest.raises(ValueError, match="t_end"):
            SimConfig(t_end=0.001, dt=0.01)
        with pytest.raises(ValueError, match="transient_fraction"):
            SimConfig(transient_fraction=1.0)
        with pytest.raises(ValueError, match="record_stride"):
            SimConfig(record_stride=0)
        with pytest.raises(ValueError, match="init_range"):
            SimConfig(init_range=(5.0, 1.0))
