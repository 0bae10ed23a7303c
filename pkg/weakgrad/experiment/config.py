"""Experiment configuration schema.

Values are resolved as defaults ← JSON config file ← CLI flags and validated
by Pydantic; every output file embeds the resolved configuration.
"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from weakgrad.config import get_settings
from weakgrad.core.distributions import Exponential, ParametricDistribution, parse_distribution
from weakgrad.core.models import ModelKind, ModelSpec, mm1_spec, san_bridge_spec
from weakgrad.errors import ConfigError
from weakgrad.estimators.base import EstimatorKind

DistributionField = Optional[Union[str, Dict[str, Any]]]


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


def _default_seed() -> int:
    return get_settings().DEFAULT_SEED


class ExperimentConfig(BaseModel):
    """One experiment: a model, a list of estimator cells and a budget."""

    model_config = ConfigDict(extra="forbid", protected_namespaces=(), use_enum_values=False)

    # ── Model ────────────────────────────────────────────────────────────
    model: ModelKind = ModelKind.MM1
    n_customers: int = Field(default=5, ge=1)
    service_mean: float = Field(default=1.0, gt=0)
    arrival_mean: float = Field(default=2.0, gt=0)
    service_dist: DistributionField = None
    arrival_dist: DistributionField = None

    # ── Estimators & budget ──────────────────────────────────────────────
    estimator: List[EstimatorKind] = Field(default_factory=lambda: [EstimatorKind.ISWD], min_length=1)
    n: Optional[int] = Field(default=None, ge=2)
    time_budget_s: Optional[float] = Field(default=None, gt=0)
    seed: int = Field(default_factory=_default_seed, ge=0, lt=2**64)
    confidence: float = Field(default=0.95, gt=0, lt=1)
    fd_step: Optional[float] = Field(default=None, gt=0)
    # Execution knobs only; samples do not depend on them.
    block_size: Optional[int] = Field(default=None, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)

    # ── Output ───────────────────────────────────────────────────────────
    out: Optional[Path] = None
    format: OutputFormat = OutputFormat.CSV
    omit_timing: bool = False

    @field_validator("estimator", mode="before")
    @classmethod
    def _split_estimators(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [part.strip() for part in value.split(",") if part.strip()]
        return value

    @field_validator("service_dist", "arrival_dist")
    @classmethod
    def _parse_distribution(cls, value: DistributionField) -> DistributionField:
        if value is not None:
            parse_distribution(value)
        return value

    @model_validator(mode="after")
    def _exactly_one_budget(self) -> "ExperimentConfig":
        if (self.n is None) == (self.time_budget_s is None):
            raise ValueError("exactly one of n and time_budget_s must be set")
        return self

    # ---- derived objects ----------------------------------------------------

    def service_distribution(self) -> ParametricDistribution:
        if self.service_dist is not None:
            return parse_distribution(self.service_dist)
        return Exponential(mean=self.service_mean)

    def build_model(self) -> ModelSpec:
        if self.model is ModelKind.SAN_BRIDGE:
            return san_bridge_spec(arc_dist=self.service_distribution())
        arrival = parse_distribution(self.arrival_dist) if self.arrival_dist is not None else None
        return mm1_spec(
            self.n_customers,
            arrival_mean=self.arrival_mean,
            service_dist=self.service_distribution(),
            arrival_dist=arrival,
        )

    def echo(self) -> Dict[str, Any]:
        """Canonical, re-runnable form of the resolved configuration."""
        data = self.model_dump(mode="json")
        data.pop("out", None)
        return data

    def echo_json(self) -> str:
        return json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a JSON config file whose keys are ExperimentConfig field names."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config", "top level of the config file must be an object")
    return data


def resolve_config(file_values: Mapping[str, Any], flag_values: Mapping[str, Any]) -> ExperimentConfig:
    """Flags override file values; ``None`` flags mean "not given"."""
    merged: Dict[str, Any] = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    # A flag budget replaces the file's budget of the other kind.
    if flag_values.get("n") is not None:
        merged.pop("time_budget_s", None)
    if flag_values.get("time_budget_s") is not None:
        merged.pop("n", None)
    return ExperimentConfig(**merged)
