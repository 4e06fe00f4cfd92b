"""Sampled-data closed-loop simulation.

At each grid point the controller reads the measured output and
model-based error derivatives, picks a control that is then held over the
next interval, and plant (and observer) advance by one RK4 step. The
disturbance is evaluated at the grid point and held as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _backend
from .controllers import (
    PidConfig,
    PidState,
    Smc1Config,
    Smc2Config,
    SuperTwistConfig,
    TwistingConfig,
    clamp,
    pid_step,
    smc1_control,
    smc2_step,
    super_twisting_step,
    surface,
    surface1,
    surface2,
    twisting_step,
)
from .lti import StateSpaceModel, TransferFunction, derivative_rows, relative_degree
from .observer import SmObserver, estimated_velocity, injection_gains, make_observer, observer_step
from .plant import TorpedoPlant, make_default_plant, phi
from .scenario import Scenario


_BLOWUP = 1e150  # well before norms overflow


class DivergenceError(RuntimeError):
    def __init__(self, t: float, detail: str = "non-finite state"):
        super().__init__(f"divergence at t={t:.6g} s: {detail}")
        self.t = t


class GridMismatchError(ValueError):
    """Scenarios in a comparison do not share grid and reference."""


@dataclass(frozen=True, eq=False)
class RunLog:
    """Uniformly sampled trajectory of one closed-loop run.

    ``u[k]`` is the control held over ``[t[k], t[k] + dt)``; ``s`` is the
    controller's surface (the tracking error for PID). ``eps`` is the
    velocity estimation error when an observer is attached.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    r: np.ndarray
    e: np.ndarray
    s: np.ndarray
    u: np.ndarray
    phi_norm: np.ndarray
    xhat: Optional[np.ndarray] = None
    eps: Optional[np.ndarray] = None
    name: str = ""
    scenario: Optional[Scenario] = field(default=None, repr=False)

    def __len__(self):
        return self.t.size

    @property
    def n_states(self) -> int:
        return self.x.shape[1]

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    def columns(self) -> list[str]:
        cols = ["t"] + [f"x{i}" for i in range(self.n_states)] + ["y", "r", "e", "s", "u", "phi_norm"]
        if self.xhat is not None:
            cols += [f"xhat{i}" for i in range(self.n_states)] + ["eps"]
        return cols

    def as_matrix(self) -> np.ndarray:
        parts = [self.t[:, None], self.x] + [v[:, None] for v in (self.y, self.r, self.e, self.s, self.u, self.phi_norm)]
        if self.xhat is not None:
            parts += [self.xhat, self.eps[:, None]]
        return np.hstack(parts)


def build_plant(sc: Scenario) -> TorpedoPlant:
    ps = sc.plant
    dist = ps.disturbance
    if "seed" not in dist.model_fields_set:
        dist = dist.model_copy(update={"seed": sc.seed})
    override = TransferFunction(ps.tf.num, ps.tf.den) if ps.tf is not None else None
    return make_default_plant(
        dist,
        active_channel=ps.channel,
        inclination_tf=override if ps.channel == "inclination" else None,
        immersion_tf=override if ps.channel == "immersion" else None,
    )


def initial_state(sc: Scenario, model: StateSpaceModel) -> np.ndarray:
    """Canonical initial state; ``initial_output`` is solved through ``[C; CA; ...]``."""
    ps = sc.plant
    n = model.n
    if ps.initial_state is not None:
        x0 = np.asarray(ps.initial_state, dtype=float)
        if x0.shape != (n,):
            raise ValueError(f"initial_state needs {n} entries, got {x0.size}")
        return x0
    if ps.initial_output is not None:
        ys = list(ps.initial_output)
        if len(ys) > n:
            raise ValueError(f"initial_output takes at most {n} entries")
        ys += [0.0] * (n - len(ys))
        return np.linalg.solve(np.array(derivative_rows(model, n - 1)), np.asarray(ys))
    return np.zeros(n)


def surface_coefficients(cfg) -> tuple[float, ...]:
    """Coefficients of the logged surface on ``(e, e', e'')``."""
    if isinstance(cfg, PidConfig):
        return (1.0,)
    if isinstance(cfg, Smc1Config):
        return (cfg.k1, cfg.k2)
    if isinstance(cfg, Smc2Config):
        return (cfg.beta1, cfg.beta2, cfg.beta3)
    return tuple(cfg.surface)


def build_observer(sc: Scenario, model: StateSpaceModel) -> Optional[SmObserver]:
    ocfg = sc.observer
    if ocfg is None:
        return None
    if ocfg.lambda_gain is not None:
        lam = np.asarray(ocfg.lambda_gain, dtype=float)
    else:
        lam = injection_gains(model, ocfg.injection_zeros, ocfg.injection_gain)
    return make_observer(model, lam, ocfg.initial_estimate, ocfg.velocity_readout)


ControlLaw = Callable[[Sequence[float], float], tuple[float, float]]


def _make_control_law(cfg, dt: float, plant_rd: int) -> tuple[ControlLaw, float]:
    """Return ``(law, u_initial)``; ``law(error_derivs, u_prev) -> (u, s)``."""
    if isinstance(cfg, PidConfig):
        state = [PidState()]

        def law(ed, u_prev):
            u, state[0] = pid_step(ed[0], state[0], dt, cfg)
            return u, ed[0]

        return law, 0.0

    if isinstance(cfg, Smc1Config):

        def law(ed, u_prev):
            s = surface1(ed[0], ed[1], cfg)
            return smc1_control(s, cfg), s

        return law, 0.0

    if isinstance(cfg, Smc2Config):

        def law(ed, u_prev):
            sigma = surface2(ed[0], ed[1], ed[2], cfg)
            return smc2_step(-sigma, u_prev, dt, cfg), sigma

        return law, cfg.u_init

    coeffs = cfg.surface
    surface_rd = plant_rd - (len(coeffs) - 1)

    if isinstance(cfg, TwistingConfig):
        if surface_rd not in (1, 2):
            raise ValueError(f"twisting needs a surface of relative degree 1 or 2, got {surface_rd}")
        integrate = surface_rd == 1

        def law(ed, u_prev):
            s = surface(coeffs, ed)
            s_dot = surface(coeffs, ed[1:])
            v = twisting_step(-s, -s_dot, cfg)
            u = u_prev + v * dt if integrate else v
            return clamp(u, cfg.u_limit), s

        return law, 0.0

    if isinstance(cfg, SuperTwistConfig):
        if surface_rd != 1:
            raise ValueError(f"super-twisting needs a surface of relative degree 1, got {surface_rd}")
        state = [0.0]

        def law(ed, u_prev):
            s = surface(coeffs, ed)
            u, state[0] = super_twisting_step(-s, state[0], dt, cfg)
            return u, s

        return law, 0.0

    raise TypeError(f"unsupported controller config {type(cfg).__name__}")


def run_closed_loop(sc: Scenario, name: Optional[str] = None) -> RunLog:
    plant = build_plant(sc)
    model = plant.active
    if model.D[0, 0] != 0.0:
        raise ValueError("closed loop requires a strictly proper channel")
    dt = sc.dt
    N = sc.n_samples
    n = model.n
    A = model.A
    b = np.ascontiguousarray(model.B[:, 0])
    rows = derivative_rows(model, 3)
    c_row = rows[0]
    hf = [float(rows[k] @ b) for k in range(3)]  # C A^k B
    law, u_prev = _make_control_law(sc.controller, dt, relative_degree(model))
    dist = plant.disturbance
    ref = sc.reference

    obs = build_observer(sc, model)
    in_loop = obs is not None and sc.observer.in_loop

    x = initial_state(sc, model).copy()
    t_grid = np.arange(N) * dt
    X = np.empty((N, n))
    Y = np.empty(N)
    R = np.empty(N)
    E = np.empty(N)
    S = np.empty(N)
    U = np.empty(N)
    PHI = np.empty(N)
    XH = np.empty((N, n)) if obs is not None else None
    EPS = np.empty(N) if obs is not None else None

    for k in range(N):
        t = t_grid[k]
        y = float(c_row @ x)
        z = obs.x_hat if in_loop else x
        rd = ref.derivatives(t, 3)
        ed = [
            rd[0] - y,
            rd[1] - (float(rows[1] @ z) + hf[0] * u_prev),
            rd[2] - (float(rows[2] @ z) + hf[1] * u_prev),
            rd[3] - (float(rows[3] @ z) + hf[2] * u_prev),
        ]
        u, s = law(ed, u_prev)
        phi_vec = phi(dist, x, t)

        X[k] = x
        Y[k] = y
        R[k] = rd[0]
        E[k] = ed[0]
        S[k] = s
        U[k] = u
        PHI[k] = float(np.linalg.norm(phi_vec))
        if obs is not None:
            XH[k] = obs.x_hat
            EPS[k] = float(obs.velocity_readout @ x) - estimated_velocity(obs)

        if not (np.isfinite(u) and np.isfinite(s)):
            raise DivergenceError(t, "non-finite control")
        if k + 1 < N:
            x = _backend.rk4_affine(A, x, b * u + phi_vec, dt)
            if not np.all(np.isfinite(x)):
                raise DivergenceError(t + dt)
            if np.max(np.abs(x)) > _BLOWUP:
                raise DivergenceError(t + dt, f"state magnitude above {_BLOWUP:g}")
            if obs is not None:
                obs = observer_step(obs, u, y, dt)
                if not np.all(np.isfinite(obs.x_hat)):
                    raise DivergenceError(t + dt, "non-finite observer state")
        u_prev = u

    return RunLog(t_grid, X, Y, R, E, S, U, PHI, XH, EPS, name=name or sc.name, scenario=sc)


@dataclass
class ComparisonReport:
    labels: list[str]
    logs: list[RunLog]
    metrics: list  # list[MetricsReport]

    def rows(self) -> list[tuple[str, object]]:
        return list(zip(self.labels, self.metrics))


def check_shared_grid(scenarios: Sequence[Scenario]) -> None:
    first = scenarios[0]
    for sc in scenarios[1:]:
        if sc.dt != first.dt or sc.duration != first.duration:
            raise GridMismatchError(
                f"{sc.name}: grid (dt={sc.dt}, duration={sc.duration}) differs from "
                f"{first.name} (dt={first.dt}, duration={first.duration})"
            )
        if sc.reference != first.reference:
            raise GridMismatchError(f"{sc.name}: reference differs from {first.name}")


def unique_labels(scenarios: Sequence[Scenario]) -> list[str]:
    labels, seen = [], {}
    for sc in scenarios:
        count = seen.get(sc.name, 0) + 1
        seen[sc.name] = count
        labels.append(sc.name if count == 1 else f"{sc.name}#{count}")
    return labels


def run_comparison(scenarios: Sequence[Scenario]) -> ComparisonReport:
    from .metrics import metrics_report

    if not scenarios:
        raise ValueError("nothing to compare")
    check_shared_grid(scenarios)
    labels = unique_labels(scenarios)
    logs = [run_closed_loop(sc, name=label) for sc, label in zip(scenarios, labels)]
    return ComparisonReport(labels, logs, [metrics_report(log) for log in logs])
