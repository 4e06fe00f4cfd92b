"""Sliding-mode observer: a model copy corrected by ``lambda * sign(y - C x_hat)``."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .controllers import sign
from .lti import StateSpaceModel, derivative_rows, rk4_step


@dataclass(frozen=True, eq=False)
class SmObserver:
    """Observer state plus its fixed design data.

    ``velocity_readout`` maps ``x_hat`` to the estimated velocity; the
    default is ``C A``, i.e. the time derivative of the measured output.
    """

    model: StateSpaceModel
    lambda_gain: np.ndarray
    x_hat: np.ndarray
    velocity_readout: np.ndarray

    def __post_init__(self):
        n = self.model.n
        lam = np.asarray(self.lambda_gain, dtype=float).reshape(-1)
        xh = np.asarray(self.x_hat, dtype=float).reshape(-1)
        ro = np.asarray(self.velocity_readout, dtype=float).reshape(-1)
        for name, v in (("lambda_gain", lam), ("x_hat", xh), ("velocity_readout", ro)):
            if v.shape != (n,):
                raise ValueError(f"{name} has {v.size} entries, observed channel has {n} states")
        if np.any(lam < 0) or not np.any(lam > 0):
            raise ValueError("lambda_gain entries must be >= 0 with at least one > 0")
        object.__setattr__(self, "lambda_gain", lam)
        object.__setattr__(self, "x_hat", xh)
        object.__setattr__(self, "velocity_readout", ro)


def make_observer(model: StateSpaceModel, lambda_gain, x_hat=None, velocity_readout=None) -> SmObserver:
    if x_hat is None:
        x_hat = np.zeros(model.n)
    if velocity_readout is None:
        velocity_readout = derivative_rows(model, 1)[1]
    return SmObserver(model, lambda_gain, x_hat, velocity_readout)


def injection(obs: SmObserver, y_meas: float) -> np.ndarray:
    """The correction term ``lambda * sign(y_meas - C x_hat)``."""
    return obs.lambda_gain * sign(y_meas - float(obs.model.C[0] @ obs.x_hat))


def observer_step(obs: SmObserver, u: float, y_meas: float, dt: float) -> SmObserver:
    """One RK4 step of the observer with input and injection held over ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x_hat = rk4_step(obs.model, obs.x_hat, u, injection(obs, y_meas), dt)
    return replace(obs, x_hat=x_hat)


def estimated_velocity(obs: SmObserver) -> float:
    return float(obs.velocity_readout @ obs.x_hat)


def velocity_error(true_v: float, est_v: float) -> float:
    return true_v - est_v


def injection_gains(model: StateSpaceModel, zeros, gain: float) -> np.ndarray:
    """Injection vector placing the zeros of ``C (pI - A)^-1 lambda``.

    On the sliding set ``C e = 0`` the remaining estimation error evolves
    with these zeros as its poles; ``gain = C lambda`` sets the injection
    level at the output. Uses the Leverrier form of ``adj(pI - A)``.
    The result may contain negative entries, which :class:`SmObserver`
    rejects; callers pick zeros accordingly.
    """
    n = model.n
    zeros = np.asarray(zeros, dtype=float)
    if zeros.size != n - 1:
        raise ValueError(f"need {n - 1} zeros for a {n}-state model")
    char = np.poly(model.A)
    E = np.eye(n)
    rows = [model.C[0] @ E]
    for i in range(1, n):
        E = model.A @ E + char[i] * np.eye(n)
        rows.append(model.C[0] @ E)
    target = gain * np.atleast_1d(np.poly(zeros))
    return np.linalg.solve(np.array(rows), target)


def injection_zeros(model: StateSpaceModel, lambda_gain) -> np.ndarray:
    """Zeros of ``C (pI - A)^-1 lambda`` (the sliding error dynamics)."""
    n = model.n
    char = np.poly(model.A)
    E = np.eye(n)
    lam = np.asarray(lambda_gain, dtype=float)
    coeffs = [model.C[0] @ lam]
    for i in range(1, n):
        E = model.A @ E + char[i] * np.eye(n)
        coeffs.append(model.C[0] @ E @ lam)
    coeffs = np.trim_zeros(np.asarray(coeffs), "f")
    return np.roots(coeffs) if coeffs.size > 1 else np.array([])
