import math

import pytest
from hypothesis import assume, given, settings, strategies as st
from pydantic import ValidationError

from torpedo_smc.controllers import (
    PidConfig,
    PidState,
    Smc1Config,
    Smc2Config,
    SuperTwistConfig,
    TwistingConfig,
    pid_step,
    reaching_time_bound,
    sat,
    sign,
    smc1_control,
    smc2_step,
    super_twisting_step,
    surface1,
    surface2,
    twisting_step,
)

finite = st.floats(-1e6, 1e6)


def smc1(**kw):
    base = dict(k1=1.0, k2=0.5, k=10.0, eta=1.0, boundary_layer=0.0)
    base.update(kw)
    return Smc1Config(**base)


def smc2(**kw):
    base = dict(beta1=1.0, beta2=1.0, beta3=1.0, k=100.0, u_init=0.0, u_limit=1.0)
    base.update(kw)
    return Smc2Config(**base)


def test_sign_examples():
    assert (sign(3.2), sign(-0.1), sign(0.0)) == (1.0, -1.0, 0.0)


def test_sat_examples():
    assert sat(0.5, 1.0) == 0.5
    assert sat(5, 1.0) == 1.0
    assert sat(-0.02, 0.01) == -1.0
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            sat(1.0, bad)


@given(finite)
def test_sign_is_odd(x):
    assert sign(-x) == -sign(x)


@given(finite, st.floats(1e-6, 1e3))
def test_sat_is_odd_and_bounded(x, layer):
    assert sat(-x, layer) == -sat(x, layer)
    assert abs(sat(x, layer)) <= 1.0


@given(st.floats(1e-3, 1e3) | st.floats(-1e3, -1e-3))
def test_sat_tends_to_sign(x):
    assert sat(x, abs(x) * 1e-9) == sign(x)


def test_surface1_examples():
    assert surface1(0, 0, smc1()) == 0
    assert surface1(1, -3, smc1(k1=2, k2=1)) == -1
    assert surface1(-2, 4, smc1(k1=1, k2=0.5)) == 0


def test_smc1_control_examples():
    assert smc1_control(0.3, smc1(k=10)) == 10
    assert smc1_control(0.0, smc1(k=10)) == 0
    assert smc1_control(0.0, smc1(k=10, boundary_layer=0.5)) == 0
    assert smc1_control(0.003, smc1(k=10, boundary_layer=0.01)) == pytest.approx(3.0)


@given(finite, st.floats(1e-3, 1e3), st.floats(0, 10))
def test_relay_magnitude(s, k, layer):
    cfg = smc1(k=k, boundary_layer=layer)
    u = smc1_control(s, cfg)
    assert abs(u) <= k
    if abs(s) >= layer and s != 0:
        assert abs(u) == k


@given(finite, finite, st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_relay_decision_scale_invariant(e, ed, k1, k2, c):
    base = smc1(k1=k1, k2=k2)
    scaled = smc1(k1=c * k1, k2=c * k2)
    s = surface1(e, ed, base)
    assume(abs(s) > 1e-9 * (abs(k1 * e) + abs(k2 * ed) + 1e-300))
    assert smc1_control(surface1(e, ed, scaled), scaled) == smc1_control(s, base)


def test_surface2_examples():
    assert surface2(0, 0, 0, smc2()) == 0
    assert surface2(1, -1, 1, smc2(beta1=1, beta2=2, beta3=1)) == 0
    assert surface2(0.5, 0.2, -1, smc2(beta1=3, beta2=1, beta3=0.1)) == pytest.approx(1.6)


def test_smc2_step_examples():
    cfg = smc2(k=100, u_limit=1.0)
    assert smc2_step(0.0, 0.37, 0.001, cfg) == 0.37
    assert smc2_step(1.0, 0.0, 0.001, cfg) == pytest.approx(-0.1)
    for n in (3, 12):
        u = 0.0
        for _ in range(n):
            u = smc2_step(2.5, u, 0.001, cfg)
        assert u == pytest.approx(max(-100 * n * 0.001, -1.0))


@settings(max_examples=100)
@given(st.lists(finite, min_size=1, max_size=60), st.floats(1e-3, 1e3), st.floats(1e-5, 1e-2),
       st.floats(1e-3, 10))
def test_smc2_is_lipschitz_and_clamped(sigmas, k, dt, limit):
    cfg = smc2(k=k, u_limit=limit)
    u = 0.0
    for s in sigmas:
        nu = smc2_step(s, u, dt, cfg)
        assert abs(nu - u) <= k * dt * (1 + 1e-12)
        assert abs(nu) <= limit
        u = nu


def test_smc2_config_rules():
    with pytest.raises(ValidationError):
        smc2(beta2=0.0)
    with pytest.raises(ValidationError):
        smc2(u_init=2.0, u_limit=1.0)
    with pytest.raises(ValidationError):
        smc2(extra_field=1)


def test_super_twisting_examples():
    cfg = SuperTwistConfig(alpha=2.0, gamma=1.0, u_limit=100.0)
    assert super_twisting_step(0.0, 0.0, 0.01, cfg) == (0.0, 0.0)
    u, st_ = super_twisting_step(4.0, 0.0, 0.01, cfg)
    assert u == pytest.approx(-4.01) and st_ == pytest.approx(-0.01)


@given(st.floats(-1e4, 1e4), st.floats(1e-3, 10), st.floats(1e-3, 10))
def test_super_twisting_odd_symmetry(s, alpha, gamma):
    cfg = SuperTwistConfig(alpha=alpha, gamma=gamma, u_limit=1e9)
    up, sp = super_twisting_step(s, 0.0, 0.01, cfg)
    um, sm = super_twisting_step(-s, 0.0, 0.01, cfg)
    assert um == -up and sm == -sp


def test_twisting_examples():
    cfg = TwistingConfig(r1=5.0, r2=2.0)
    assert twisting_step(1, 1, cfg) == -5
    assert twisting_step(1, -1, cfg) == -2
    assert twisting_step(0, 3, cfg) == 0
    with pytest.raises(ValidationError):
        TwistingConfig(r1=1.0, r2=2.0)


def test_pid_examples():
    cfg = PidConfig(kp=1.0, ki=1.0, kd=1.0)
    state = PidState()
    for _ in range(5):
        u, state = pid_step(0.0, state, 0.1, cfg)
        assert u == 0.0
    u, _ = pid_step(1.5, PidState(), 0.1, PidConfig(kp=2.0, ki=0.0, kd=0.0))
    assert u == 3.0
    cfg = PidConfig(kp=0.0, ki=1.0, kd=0.0)
    state = PidState()
    for _ in range(10):
        u, state = pid_step(1.0, state, 0.1, cfg)
    assert u == pytest.approx(1.0)


@given(st.lists(finite, min_size=1, max_size=80), st.floats(0.01, 100))
def test_pid_integral_clamped_and_finite(errors, limit):
    cfg = PidConfig(kp=1.0, ki=2.0, kd=0.5, integral_limit=limit)
    state = PidState()
    for e in errors:
        u, state = pid_step(e, state, 1e-3, cfg)
        assert math.isfinite(u) and abs(state.integral) <= limit


def test_pid_derivative_term():
    cfg = PidConfig(kp=0.0, ki=0.0, kd=2.0)
    u0, st0 = pid_step(1.0, PidState(), 0.1, cfg)
    u1, _ = pid_step(1.5, st0, 0.1, cfg)
    assert u0 == 0.0 and u1 == pytest.approx(10.0)


def test_reaching_time_bound_examples():
    assert reaching_time_bound(5, 1) == 5
    assert reaching_time_bound(0, 3) == 0
    assert reaching_time_bound(-2, 4) == 0.5
    with pytest.raises(ValueError):
        reaching_time_bound(1, 0)


def test_smc1_config_rules():
    for bad in (dict(k=0.0), dict(k1=-1.0), dict(eta=0.0), dict(boundary_layer=-0.1)):
        with pytest.raises(ValidationError):
            smc1(**bad)
