"""Controller laws as explicit-state step functions.

Sign conventions
----------------
``surface1`` and ``surface2`` are written on the tracking error
``e = r - y``, for which the relay ``u = k sign(s)`` drives ``s`` toward
zero on a plant with positive high-frequency gain. The second-order family
(``smc2_step``, ``twisting_step``, ``super_twisting_step``) uses the usual
textbook form ``u_dot = -k sign(sigma)``, which assumes the surface grows
with the control; the simulation loop therefore feeds them the negated
surface. See :mod:`torpedo_smc.sim`.

The twisting and super-twisting laws are standard-form implementations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

_STRICT = ConfigDict(extra="forbid", frozen=True)


class PidConfig(BaseModel):
    model_config = _STRICT

    kind: Literal["pid"] = "pid"
    kp: float = Field(0.0, ge=0, allow_inf_nan=False)
    ki: float = Field(0.0, ge=0, allow_inf_nan=False)
    kd: float = Field(0.0, ge=0, allow_inf_nan=False)
    integral_limit: float = Field(math.inf, gt=0)


class Smc1Config(BaseModel):
    """Relay on ``s = k1 e + k2 e'`` with optional boundary layer."""

    model_config = _STRICT

    kind: Literal["smc1"] = "smc1"
    k1: float = Field(gt=0, allow_inf_nan=False)
    k2: float = Field(gt=0, allow_inf_nan=False)
    k: float = Field(gt=0, allow_inf_nan=False)
    eta: float = Field(gt=0, allow_inf_nan=False)
    boundary_layer: float = Field(0.0, ge=0, allow_inf_nan=False)


class Smc2Config(BaseModel):
    """Relay on the control derivative over ``sigma = b1 e + b2 e' + b3 e''``."""

    model_config = _STRICT

    kind: Literal["smc2"] = "smc2"
    beta1: float = Field(gt=0, allow_inf_nan=False)
    beta2: float = Field(gt=0, allow_inf_nan=False)
    beta3: float = Field(gt=0, allow_inf_nan=False)
    k: float = Field(gt=0, allow_inf_nan=False)
    u_init: float = Field(0.0, allow_inf_nan=False)
    u_limit: float = Field(gt=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _init_within_limit(self):
        if abs(self.u_init) > self.u_limit:
            raise ValueError("|u_init| must not exceed u_limit")
        return self


class TwistingConfig(BaseModel):
    model_config = _STRICT

    kind: Literal["twisting"] = "twisting"
    r1: float = Field(gt=0, allow_inf_nan=False)
    r2: float = Field(gt=0, allow_inf_nan=False)
    surface: tuple[float, ...] = (1.0, 0.5)  # coefficients on e, e', e''
    u_limit: float = Field(math.inf, gt=0)

    @model_validator(mode="after")
    def _check(self):
        if not self.r1 > self.r2:
            raise ValueError("twisting gains need r1 > r2 > 0")
        _check_surface(self.surface)
        return self


class SuperTwistConfig(BaseModel):
    model_config = _STRICT

    kind: Literal["super_twisting"] = "super_twisting"
    alpha: float = Field(gt=0, allow_inf_nan=False)
    gamma: float = Field(gt=0, allow_inf_nan=False)
    u_limit: float = Field(gt=0)
    surface: tuple[float, ...] = (1.0, 0.5)

    @model_validator(mode="after")
    def _check(self):
        _check_surface(self.surface)
        return self


def _check_surface(coeffs):
    if not 1 <= len(coeffs) <= 3:
        raise ValueError("surface takes 1 to 3 coefficients (e, e', e'')")
    if any(not (c >= 0 and math.isfinite(c)) for c in coeffs) or coeffs[-1] == 0:
        raise ValueError("surface coefficients must be finite, non-negative, last one positive")


ControllerConfig = PidConfig | Smc1Config | Smc2Config | TwistingConfig | SuperTwistConfig


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_error: Optional[float] = None


def sign(x: float) -> float:
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


def sat(x: float, layer: float) -> float:
    if not layer > 0:
        raise ValueError(f"boundary layer must be positive, got {layer}")
    return min(1.0, max(-1.0, x / layer))


def clamp(x: float, limit: float) -> float:
    return min(limit, max(-limit, x))


def surface(coeffs: Sequence[float], error_derivs: Sequence[float]) -> float:
    """``sum(c_i * e^(i))`` over the supplied coefficients."""
    return sum(c * e for c, e in zip(coeffs, error_derivs))


def surface1(e: float, e_dot: float, cfg: Smc1Config) -> float:
    return cfg.k1 * e + cfg.k2 * e_dot


def smc1_control(s: float, cfg: Smc1Config) -> float:
    if cfg.boundary_layer > 0:
        return cfg.k * sat(s, cfg.boundary_layer)
    return cfg.k * sign(s)


def surface2(e: float, e_dot: float, e_ddot: float, cfg: Smc2Config) -> float:
    return cfg.beta1 * e + cfg.beta2 * e_dot + cfg.beta3 * e_ddot


def smc2_step(sigma: float, u_prev: float, dt: float, cfg: Smc2Config) -> float:
    """Integrated relay: ``u = clamp(u_prev - k sign(sigma) dt, +-u_limit)``.

    The applied control is continuous and piecewise linear in time.
    """
    return clamp(u_prev - cfg.k * sign(sigma) * dt, cfg.u_limit)


def super_twisting_step(s: float, state: float, dt: float, cfg: SuperTwistConfig) -> tuple[float, float]:
    """Return ``(u, state')`` for ``u = -alpha sqrt|s| sign(s) + v``, ``v' = -gamma sign(s)``."""
    state = clamp(state - cfg.gamma * sign(s) * dt, cfg.u_limit)
    u = clamp(-cfg.alpha * math.sqrt(abs(s)) * sign(s) + state, cfg.u_limit)
    return u, state


def twisting_step(s: float, s_dot: float, cfg: TwistingConfig) -> float:
    gain = cfg.r1 if s * s_dot > 0 else cfg.r2
    return -gain * sign(s)


def pid_step(e: float, state: PidState, dt: float, cfg: PidConfig) -> tuple[float, PidState]:
    """Rectangle-rule PID with a clamped integrator; the first step has no derivative kick."""
    integral = clamp(state.integral + e * dt, cfg.integral_limit)
    deriv = 0.0 if state.prev_error is None else (e - state.prev_error) / dt
    u = cfg.kp * e + cfg.ki * integral + cfg.kd * deriv
    return u, PidState(integral, e)


def reaching_time_bound(s0: float, eta: float) -> float:
    """Upper bound ``|s0| / eta`` on the time to reach ``s = 0`` under ``s s' <= -eta |s|``."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    return abs(s0) / eta
