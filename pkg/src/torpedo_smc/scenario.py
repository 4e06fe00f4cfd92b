"""Scenario schema, YAML loading and dotted-path overrides.

Units: time in seconds, angles in radians, depth in meters, frequencies
in rad/s. Unknown keys are rejected everywhere.
"""

from __future__ import annotations

import copy
import math
import re
from importlib import resources
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .controllers import PidConfig, Smc1Config, Smc2Config, SuperTwistConfig, TwistingConfig
from .plant import Channel, Disturbance

_STRICT = ConfigDict(extra="forbid", frozen=True)

CONTROLLER_KINDS = ("pid", "smc1", "smc2", "twisting", "super_twisting")


class ScenarioError(ValueError):
    """Scenario text could not be parsed or violates the schema."""


class TfOverride(BaseModel):
    model_config = _STRICT

    num: tuple[float, ...]
    den: tuple[float, ...]


class PlantSpec(BaseModel):
    model_config = _STRICT

    channel: Channel = "immersion"
    disturbance: Disturbance = Disturbance()
    # canonical state, or [y, y', ...] of the output (missing entries are 0)
    initial_state: Optional[tuple[float, ...]] = None
    initial_output: Optional[tuple[float, ...]] = None
    tf: Optional[TfOverride] = None

    @model_validator(mode="after")
    def _one_initial_condition(self):
        if self.initial_state is not None and self.initial_output is not None:
            raise ValueError("give at most one of initial_state / initial_output")
        return self


class StepReference(BaseModel):
    model_config = _STRICT

    kind: Literal["step"] = "step"
    amplitude: float = 1.0
    t_on: float = Field(0.0, ge=0)

    def derivatives(self, t: float, order: int) -> list[float]:
        return [self.amplitude if t >= self.t_on else 0.0] + [0.0] * order


class RampReference(BaseModel):
    model_config = _STRICT

    kind: Literal["ramp"] = "ramp"
    slope: float = 1.0
    t_on: float = Field(0.0, ge=0)

    def derivatives(self, t: float, order: int) -> list[float]:
        on = t >= self.t_on
        out = [self.slope * (t - self.t_on) if on else 0.0]
        if order >= 1:
            out.append(self.slope if on else 0.0)
        return out + [0.0] * (order - len(out) + 1)


class SineReference(BaseModel):
    model_config = _STRICT

    kind: Literal["sine"] = "sine"
    amplitude: float = 1.0
    frequency: float = 1.0
    phase: float = 0.0

    def derivatives(self, t: float, order: int) -> list[float]:
        w = self.frequency
        arg = w * t + self.phase
        base = (math.sin(arg), math.cos(arg), -math.sin(arg), -math.cos(arg))
        return [self.amplitude * w**k * base[k % 4] for k in range(order + 1)]


Reference = Annotated[Union[StepReference, RampReference, SineReference], Field(discriminator="kind")]
ControllerSpec = Annotated[
    Union[PidConfig, Smc1Config, Smc2Config, TwistingConfig, SuperTwistConfig],
    Field(discriminator="kind"),
]


class ObserverSpec(BaseModel):
    model_config = _STRICT

    lambda_gain: Optional[tuple[float, ...]] = None
    injection_zeros: Optional[tuple[float, ...]] = None
    injection_gain: Optional[float] = Field(None, gt=0)
    in_loop: bool = False
    initial_estimate: Optional[tuple[float, ...]] = None
    velocity_readout: Optional[tuple[float, ...]] = None

    @model_validator(mode="after")
    def _gain_source(self):
        explicit = self.lambda_gain is not None
        placed = self.injection_zeros is not None or self.injection_gain is not None
        if explicit == placed:
            raise ValueError("give either lambda_gain or injection_zeros + injection_gain")
        if placed and (self.injection_zeros is None or self.injection_gain is None):
            raise ValueError("injection_zeros and injection_gain go together")
        return self


class OutputSpec(BaseModel):
    model_config = _STRICT

    csv: Optional[str] = None
    svg: Optional[str] = None
    report: Literal["text", "json"] = "text"


class Scenario(BaseModel):
    model_config = _STRICT

    name: str = "scenario"
    description: str = ""
    duration: float = Field(gt=0, allow_inf_nan=False)  # s
    dt: float = Field(gt=0, allow_inf_nan=False)  # s
    seed: int = 0
    plant: PlantSpec = PlantSpec()
    reference: Reference = StepReference()
    controller: ControllerSpec
    observer: Optional[ObserverSpec] = None
    output: OutputSpec = OutputSpec()

    @model_validator(mode="after")
    def _grid(self):
        if self.dt > self.duration / 100 * (1 + 1e-12):
            raise ValueError(f"dt={self.dt} exceeds duration/100={self.duration / 100}")
        return self

    @property
    def n_samples(self) -> int:
        return math.floor(self.duration / self.dt + 1e-9) + 1


def _format_validation_error(err: ValidationError) -> str:
    lines = []
    for item in err.errors():
        loc = ".".join(str(p) for p in item["loc"])
        lines.append(f"{loc or '<root>'}: {item['msg']}")
    return "; ".join(lines)


def scenario_from_dict(data: Any) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must contain a mapping at top level")
    try:
        return Scenario.model_validate(data)
    except ValidationError as err:
        raise ScenarioError(_format_validation_error(err)) from None


def packaged_scenarios() -> list[str]:
    root = resources.files("torpedo_smc") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def read_scenario_text(path_or_name: str) -> tuple[str, str]:
    """Return ``(text, source)``; bare names resolve to packaged scenarios.

    Raises ``OSError`` when nothing readable is found.
    """
    p = Path(path_or_name)
    if p.is_file():
        return p.read_text(), str(p)
    stem = path_or_name[:-5] if path_or_name.endswith(".yaml") else path_or_name
    res = resources.files("torpedo_smc") / "scenarios" / f"{stem}.yaml"
    if "/" not in stem and res.is_file():
        return res.read_text(), f"packaged:{stem}"
    raise FileNotFoundError(f"no scenario file or packaged scenario named {path_or_name!r}")


def parse_yaml(text: str) -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ScenarioError(f"YAML syntax error: {err}") from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must contain a mapping at top level")
    return data


def _resolve_path(data: dict, path: str) -> list[str]:
    parts = path.split(".")
    if not all(parts):
        raise ScenarioError(f"malformed parameter path {path!r}")
    if parts[0] in CONTROLLER_KINDS:
        kind = (data.get("controller") or {}).get("kind")
        if kind != parts[0]:
            raise ScenarioError(f"{path}: scenario controller is {kind!r}, not {parts[0]!r}")
        parts = ["controller"] + parts[1:]
    return parts


def set_path(data: dict, path: str, value: Any) -> dict:
    """Deep-copy ``data`` and assign ``value`` at dotted ``path``.

    A leading controller kind (``smc1.k``) addresses the controller block.
    """
    data = copy.deepcopy(data)
    parts = _resolve_path(data, path)
    node = data
    for key in parts[:-1]:
        nxt = node.get(key)
        if nxt is None:
            nxt = node[key] = {}
        if not isinstance(nxt, dict):
            raise ScenarioError(f"{path}: {key!r} is not a mapping")
        node = nxt
    node[parts[-1]] = value
    return data


def get_path(data: dict, path: str) -> Any:
    node: Any = data
    for key in _resolve_path(data, path):
        if not isinstance(node, dict) or key not in node:
            raise ScenarioError(f"unknown parameter path {path!r}")
        node = node[key]
    return node


_EXP_FLOAT = re.compile(r"[-+]?(\d+\.?\d*|\.\d+)[eE][-+]?\d+")


def parse_override(item: str) -> tuple[str, Any]:
    if "=" not in item:
        raise ScenarioError(f"override {item!r} is not key=value")
    key, raw = item.split("=", 1)
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        raise ScenarioError(f"override {key}: value {raw!r} is not valid YAML") from None
    if isinstance(value, str) and _EXP_FLOAT.fullmatch(value.strip()):
        value = float(value)  # YAML 1.1 reads "1e-3" as a string
    return key.strip(), value


def load_scenario_dict(path_or_name: str, overrides: list[str] | tuple[str, ...] = ()) -> dict:
    text, _ = read_scenario_text(path_or_name)
    data = parse_yaml(text)
    for item in overrides:
        key, value = parse_override(item)
        data = set_path(data, key, value)
    return data


def load_scenario(path_or_name: str, overrides: list[str] | tuple[str, ...] = ()) -> Scenario:
    return scenario_from_dict(load_scenario_dict(path_or_name, overrides))
