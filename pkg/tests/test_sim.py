import math

import numpy as np
import pytest

from torpedo_smc.metrics import reach_delta, reaching_compliance, surface_rate
from torpedo_smc.controllers import reaching_time_bound
from torpedo_smc.scenario import load_scenario, load_scenario_dict, packaged_scenarios, scenario_from_dict
from torpedo_smc.sim import (
    DivergenceError,
    GridMismatchError,
    RunLog,
    check_shared_grid,
    initial_state,
    build_plant,
    run_closed_loop,
    run_comparison,
)

ZERO_CONTROLLERS = {
    "pid": {"kind": "pid", "kp": 1.0, "ki": 0.5, "kd": 0.1},
    "smc1": {"kind": "smc1", "k1": 1.0, "k2": 0.5, "k": 0.01, "eta": 0.3},
    "smc2": {"kind": "smc2", "beta1": 1.0, "beta2": 0.8, "beta3": 0.1, "k": 0.05, "u_limit": 0.05},
    "twisting": {"kind": "twisting", "r1": 0.02, "r2": 0.01, "surface": [1.0, 0.5]},
    "super_twisting": {"kind": "super_twisting", "alpha": 0.01, "gamma": 0.01, "u_limit": 0.05,
                       "surface": [1.0, 0.5]},
}


def _quiet(controller, channel="inclination", **extra):
    d = {"name": "quiet", "duration": 1.0, "dt": 0.001, "plant": {"channel": channel},
         "reference": {"kind": "step", "amplitude": 0.0}, "controller": controller}
    d.update(extra)
    return scenario_from_dict(d)


@pytest.mark.parametrize("name", sorted(ZERO_CONTROLLERS))
def test_zero_reference_gives_zero_log(name):
    log = run_closed_loop(_quiet(ZERO_CONTROLLERS[name]))
    for series in (log.x, log.y, log.r, log.e, log.s, log.u, log.phi_norm):
        assert not np.any(series)


@pytest.mark.parametrize("name", packaged_scenarios())
def test_grid_integrity_and_finiteness(run, name):
    log = run(name)
    sc = log.scenario
    n = math.floor(sc.duration / sc.dt) + 1
    assert len(log) == n == 10001
    np.testing.assert_array_equal(log.t, np.arange(n) * sc.dt)
    for series in (log.x, log.y, log.r, log.e, log.s, log.u, log.phi_norm):
        assert series.shape[0] == n and np.all(np.isfinite(series))
    assert log.as_matrix().shape == (n, len(log.columns()))
    if sc.observer is not None:
        assert log.xhat.shape == log.x.shape and np.all(np.isfinite(log.eps))


@pytest.mark.parametrize("name", ["default_smc1_depth", "observer_in_loop", "default_pid_depth"])
def test_determinism(run, name):
    a = run(name).as_matrix()
    b = run_closed_loop(load_scenario(name)).as_matrix()
    assert a.tobytes() == b.tobytes()


def test_noise_runs_are_seeded():
    ov = ["plant.disturbance.mode=seeded_bounded_noise"]
    a = run_closed_loop(load_scenario("default_smc2_depth", ov))
    b = run_closed_loop(load_scenario("default_smc2_depth", ov))
    c = run_closed_loop(load_scenario("default_smc2_depth", ov + ["seed=5"]))
    assert a.as_matrix().tobytes() == b.as_matrix().tobytes()
    assert not np.array_equal(a.x, c.x)


def test_dt_refinement_smc2(run):
    for name in ("default_smc2_depth", "default_smc2_incl"):
        a, b = run(name), run(name, "dt=0.0005")
        assert abs(a.y[-1] - b.y[-1]) / abs(a.y[-1]) < 1e-3, name


def test_dt_refinement_smc1_output(run):
    for name in ("default_smc1_depth", "default_smc1_incl"):
        a, b = run(name), run(name, "dt=0.0005")
        assert abs(a.y[-1] - b.y[-1]) / abs(a.y[-1]) < 1e-2, name


def test_observer_does_not_touch_plant(run):
    with_obs = run("observer_demo")
    d = load_scenario_dict("observer_demo")
    d.pop("observer")
    without = run_closed_loop(scenario_from_dict(d))
    for attr in ("t", "x", "y", "r", "e", "s", "u", "phi_norm"):
        assert getattr(with_obs, attr).tobytes() == getattr(without, attr).tobytes(), attr
    assert without.xhat is None and without.eps is None


def test_smc1_depth_tracks_step(run):
    log = run("default_smc1_depth")
    after = log.t >= 4.0
    assert np.max(np.abs(log.e[after])) <= 0.01 * 1.0


def test_smc2_inclination_is_smoother_than_smc1(report):
    assert report("default_smc2_incl").total_variation_u < report("default_smc1_incl").total_variation_u
    assert report("default_smc2_incl").steady_state_error <= 0.01 * 0.1


def test_reaching_condition_smc1_depth(run):
    log = run("default_smc1_depth")
    cfg = log.scenario.controller
    delta = reach_delta(cfg)
    reach_t, viol = reaching_compliance(log.s, surface_rate(log), cfg.eta, delta, log.t)
    assert viol <= 0.01
    assert reach_t <= 1.05 * reaching_time_bound(log.s[0], cfg.eta)


def test_initial_output_is_solved_for():
    sc = load_scenario("observer_demo")
    model = build_plant(sc).active
    x0 = initial_state(sc, model)
    np.testing.assert_allclose([model.C[0] @ x0, model.C[0] @ model.A @ x0], [0.05, 0.2], rtol=1e-12)


def test_divergence_is_reported():
    sc = load_scenario("default_pid_depth", ["pid.kp=50", "pid.integral_limit=1e300", "duration=60", "dt=0.01"])
    with pytest.raises(DivergenceError) as err:
        run_closed_loop(sc)
    assert 0 < err.value.t <= 60


def test_twisting_and_super_twisting_run():
    for ctrl in ("twisting", "super_twisting"):
        d = load_scenario_dict("default_smc1_incl")
        d["controller"] = dict(ZERO_CONTROLLERS[ctrl])
        log = run_closed_loop(scenario_from_dict(d))
        assert np.all(np.isfinite(log.y))


def test_super_twisting_rejects_high_order_surface():
    d = load_scenario_dict("default_smc1_incl")
    d["controller"] = dict(ZERO_CONTROLLERS["super_twisting"], surface=[1.0])
    with pytest.raises(ValueError):
        run_closed_loop(scenario_from_dict(d))


def test_comparison_rows_and_labels():
    sc = load_scenario("default_smc2_incl")
    rep = run_comparison([sc])
    assert len(rep.rows()) == 1
    rep = run_comparison([sc, sc])
    assert rep.labels == ["default_smc2_incl", "default_smc2_incl#2"]
    assert rep.metrics[0] == rep.metrics[1]


def test_grid_mismatch():
    a = load_scenario("default_smc1_depth")
    with pytest.raises(GridMismatchError):
        check_shared_grid([a, load_scenario("default_smc1_depth", ["dt=0.002"])])
    with pytest.raises(GridMismatchError):
        check_shared_grid([a, load_scenario("default_smc1_depth", ["duration=5"])])
    with pytest.raises(GridMismatchError):
        run_comparison([a, load_scenario("default_smc1_depth", ["reference.amplitude=2"])])


def test_runlog_columns():
    log = run_closed_loop(_quiet(ZERO_CONTROLLERS["pid"], channel="immersion"))
    assert log.columns() == ["t", "x0", "x1", "x2", "x3", "y", "r", "e", "s", "u", "phi_norm"]
    assert isinstance(log, RunLog) and log.dt == pytest.approx(1e-3)
