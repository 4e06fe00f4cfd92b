"""Linearized torpedo model: inclination and immersion channels plus a bounded disturbance.

Inclination (pitch angle, rad) per unit fin deflection::

    H1(p) = 7660 / (p (p + 40))

Immersion (depth, m) per unit fin deflection::

    H2(p) = 6514 (p + 6.85) / (p (p + 1.91) (p + 12.5) (p + 40))

Both channels are realized in companion form, so the internal state has no
physical labelling beyond ``y = C x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .lti import StateSpaceModel, TransferFunction, output_derivatives, tf_from_factored, tf_to_ss

Channel = Literal["inclination", "immersion"]

INCLINATION_TF = TransferFunction([7660.0], [1.0, 40.0, 0.0])
IMMERSION_TF = tf_from_factored(6514.0, [-6.85], [0.0, -1.91, -12.5, -40.0])


class Disturbance(BaseModel):
    """State-proportional perturbation ``phi(x, t) = a * M * |x| * w(t) * d``.

    ``w(t)`` lies in ``[-1, 1]`` and ``d`` is a unit vector (the input
    direction unless configured), so ``|phi| <= a M |x| < M |x|``.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: Literal["none", "sinusoid", "seeded_bounded_noise"] = "none"
    bound_M: float = Field(1.0, gt=0)
    amplitude_fraction: float = Field(0.0, ge=0, lt=1)
    frequency: float = 1.0  # rad/s, sinusoid only
    phase: float = 0.0  # rad, sinusoid only
    seed: int = 0  # noise only
    hold: float = Field(0.05, gt=0)  # s, noise sample-and-hold interval
    direction: Optional[tuple[float, ...]] = None


@lru_cache(maxsize=4096)
def _noise_sample(seed: int, index: int) -> float:
    return float(np.random.default_rng([seed, index]).uniform(-1.0, 1.0))


def _unit_direction(d: Disturbance, n: int) -> np.ndarray:
    if d.direction is None:
        v = np.zeros(n)
        v[-1] = 1.0
        return v
    v = np.asarray(d.direction, dtype=float)
    if v.shape != (n,):
        raise ValueError(f"disturbance direction has {v.size} entries, state has {n}")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("disturbance direction must be nonzero")
    return v / norm


def disturbance_weight(d: Disturbance, t: float) -> float:
    """The scalar ``w(t)`` in ``[-1, 1]``."""
    if d.mode == "sinusoid":
        return math.sin(d.frequency * t + d.phase)
    if d.mode == "seeded_bounded_noise":
        return _noise_sample(d.seed, math.floor(t / d.hold))
    return 0.0


def phi(d: Disturbance, x, t: float) -> np.ndarray:
    """Evaluate the disturbance vector at state ``x`` and time ``t``."""
    x = np.asarray(x, dtype=float)
    if d.mode == "none":
        return np.zeros_like(x)
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        return np.zeros_like(x)
    scale = d.amplitude_fraction * d.bound_M * nx * disturbance_weight(d, t)
    return scale * _unit_direction(d, x.size)


@dataclass(frozen=True)
class TorpedoPlant:
    inclination: StateSpaceModel
    immersion: StateSpaceModel
    disturbance: Disturbance
    active_channel: Channel = "immersion"

    @property
    def active(self) -> StateSpaceModel:
        return self.inclination if self.active_channel == "inclination" else self.immersion


def make_default_plant(
    disturbance: Disturbance | None = None,
    active_channel: Channel = "immersion",
    inclination_tf: TransferFunction | None = None,
    immersion_tf: TransferFunction | None = None,
) -> TorpedoPlant:
    """Realize both channels from the nominal coefficients (or overrides)."""
    return TorpedoPlant(
        inclination=tf_to_ss(inclination_tf or INCLINATION_TF),
        immersion=tf_to_ss(immersion_tf or IMMERSION_TF),
        disturbance=disturbance if disturbance is not None else Disturbance(),
        active_channel=active_channel,
    )


def plant_derivative(p: TorpedoPlant, x, u: float, t: float) -> np.ndarray:
    model = p.active
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ValueError(f"state has shape {x.shape}, {p.active_channel} channel needs ({model.n},)")
    return model.A @ x + model.B[:, 0] * u + phi(p.disturbance, x, t)


def channel_output_derivatives(p: TorpedoPlant, x, u: float) -> tuple[float, float, float]:
    """Nominal-model ``(y, y', y'')`` of the active channel; the disturbance is not seen."""
    y, yd, ydd = output_derivatives(p.active, x, u, 2)
    return y, yd, ydd
