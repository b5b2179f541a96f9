"""
Experiment configuration
------------------------
Pydantic models for the JSON experiment files under ``data/experiments/``.

    {
      "name":   "memory_simultaneous",
      "gadget": {"kind": "memory", "strategy": "simultaneous", "state": "0"},
      "noise":  {"model": "scem", "p": [1e-4, 3e-4, 1e-3]},
      "shots":  100000,
      "seed":   7
    }

Multi-channel sweeps name an architecture and a scenario and sweep T2:

      "noise":  {"model": "multichannel", "architecture": "AbaQusS",
                 "scenario": "optimistic", "t2": [0.5, 1.0, 2.0]}

Usage:
    config = load_config("data/experiments/memory_scem.json")
    config = config.with_overrides(seed=3, shots=1000)
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from architectures.models import ARCHITECTURES, SCENARIOS
from engine.errors import ConfigError
from gadgets.protocols import STRATEGIES
from gadgets.spec import CARDINAL_STATES, GadgetKind, GadgetSpec, check_state

logger = logging.getLogger(__name__)

DEFAULT_SHOT_CAP = 10 ** 8


def _sorted_non_empty(values: list[float], what: str) -> list[float]:
    if not values:
        raise ValueError(f"{what} sweep must not be empty")
    if list(values) != sorted(values):
        raise ValueError(f"{what} sweep must be sorted ascending, got {values}")
    return values


class GadgetSpecModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind:     GadgetKind
    state:    str = "0"
    strategy: str = "simultaneous"
    rounds:   int | None = Field(default=None, ge=1)
    repeated: bool = True
    basis:    Literal["X", "Z"] = "Z"
    options:  dict[str, bool] = Field(default_factory=dict)

    @field_validator("state")
    @classmethod
    def _cardinal(cls, value: str) -> str:
        return check_state(value)

    @field_validator("strategy")
    @classmethod
    def _strategy(cls, value: str) -> str:
        if value not in STRATEGIES:
            raise ValueError(f"unknown strategy '{value}' (expected one of {STRATEGIES})")
        return value

    def to_spec(self, state: str | None = None) -> GadgetSpec:
        return GadgetSpec(self.kind, state=state or self.state, strategy=self.strategy, rounds=self.rounds,
                          repeated=self.repeated, basis=self.basis, options=dict(self.options))


class NoiseSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model:        Literal["scem", "multichannel"] = "scem"
    p:            list[float] = Field(default_factory=list)
    idle:         bool = True
    architecture: str | None = None
    scenario:     str | None = None
    t2:           list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _sweep(self) -> "NoiseSpec":
        if self.model == "scem":
            _sorted_non_empty(self.p, "p")
            if any(not 0.0 <= p <= 1.0 for p in self.p):
                raise ValueError(f"p values must lie in [0, 1], got {self.p}")
            return self
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"architecture must be one of {ARCHITECTURES}, got {self.architecture!r}")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        _sorted_non_empty(self.t2, "t2")
        if any(t <= 0 for t in self.t2):
            raise ValueError(f"t2 values must be positive, got {self.t2}")
        return self

    @property
    def parameter(self) -> str:
        return "p" if self.model == "scem" else "t2"

    @property
    def points(self) -> list[float]:
        return list(self.p if self.model == "scem" else self.t2)

    def tag(self) -> str:
        if self.model == "scem":
            return "scem" + ("" if self.idle else "_noidle")
        return f"{self.architecture}_{self.scenario}"


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name:            str = "experiment"
    gadget:          GadgetSpecModel
    noise:           NoiseSpec
    shots:           int = Field(ge=1)
    seed:            int = 0
    workers:         int = Field(default=1, ge=1)
    adaptive:        bool = False
    target_failures: int = Field(default=100, ge=1)
    max_shots:       int = Field(default=DEFAULT_SHOT_CAP, ge=1)
    states:          list[str] | None = None
    validate_tree:   bool = True
    output:          str = "results"
    format:          Literal["csv", "json"] = "csv"

    @field_validator("states")
    @classmethod
    def _states(cls, value: list[str] | None) -> list[str] | None:
        if value is None:
            return None
        if not value:
            raise ValueError("states must not be empty (omit it to use the gadget state)")
        return [check_state(s) for s in value]

    @property
    def run_states(self) -> list[str]:
        return list(self.states) if self.states else [self.gadget.state]

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        """CLI overrides (``None`` values are ignored), re-validated."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return ExperimentConfig.model_validate({**self.model_dump(), **changes})

    def digest(self) -> str:
        """Short stable hash of the full configuration."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate one experiment file (pydantic ``ValidationError`` on bad content)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"❌ Experiment config not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as error:
        raise ConfigError(f"❌ Experiment config {path} is not valid JSON: {error}") from error
    config = ExperimentConfig.model_validate(data)
    logger.info(f"📂 Experiment config loaded: {path} ('{config.name}', {len(config.noise.points)} point(s))")
    return config


__all__ = ["CARDINAL_STATES", "ExperimentConfig", "GadgetSpecModel", "NoiseSpec", "load_config"]
