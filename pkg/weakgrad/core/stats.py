"""Point estimates, normal-approximation confidence intervals and
work-normalized comparison of estimator runs."""

from __future__ import annotations

import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats as sps

from weakgrad.errors import ComparisonError, InsufficientDataError, ParameterError

CSV_COLUMNS: Tuple[str, ...] = (
    "estimator",
    "model",
    "N",
    "theta",
    "n",
    "mean",
    "variance",
    "ci_low",
    "ci_high",
    "wall_time_s",
    "model_evals",
    "efficiency",
)


class EstimateReport(BaseModel):
    """Summary of one gradient sample batch."""

    model_config = ConfigDict(protected_namespaces=(), frozen=True)

    estimator: str
    model: str
    n_customers: Optional[int] = None
    theta: float
    n: int = Field(..., ge=1)
    mean: float
    sample_variance: float = Field(..., ge=0)
    std_error: float = Field(..., ge=0)
    confidence: float = Field(..., gt=0, lt=1)
    ci_low: float
    ci_high: float
    wall_time: float = Field(..., ge=0)
    model_evaluations: int = Field(..., ge=0)
    efficiency: Optional[float] = None
    config_fingerprint: str

    @model_validator(mode="after")
    def _interval_brackets_mean(self) -> "EstimateReport":
        if not self.ci_low <= self.mean <= self.ci_high:
            raise ValueError("confidence interval must contain the mean")
        return self

    @property
    def ci_width(self) -> float:
        return self.ci_high - self.ci_low

    def csv_row(self, *, omit_timing: bool = False) -> List[Any]:
        return [
            self.estimator,
            self.model,
            "" if self.n_customers is None else self.n_customers,
            self.theta,
            self.n,
            self.mean,
            self.sample_variance,
            self.ci_low,
            self.ci_high,
            "" if omit_timing else self.wall_time,
            self.model_evaluations,
            "" if omit_timing or self.efficiency is None else self.efficiency,
        ]

    def to_json_dict(self, *, omit_timing: bool = False) -> Dict[str, Any]:
        data = self.model_dump(mode="json")
        if omit_timing:
            data["wall_time"] = None
            data["efficiency"] = None
        return data


class ComparisonVerdict(BaseModel):
    """How report ``a`` fares against report ``b`` at equal simulation time."""

    estimator_a: str
    estimator_b: str
    width_ratio: float
    time_normalized_width_ratio: float
    variance_ratio: float
    efficiency_ratio: Optional[float] = None
    a_dominates: bool


def _ratio(numerator: float, denominator: float) -> float:
    if denominator == 0:
        return 1.0 if numerator == 0 else math.inf
    return numerator / denominator


def summarize(batch: Any, confidence: float = 0.95) -> EstimateReport:
    """Mean, plug-in variance (divisor n) and mean ± z·sqrt(var/n) interval."""
    if not 0 < confidence < 1:
        raise ParameterError(f"confidence must lie in (0, 1), got {confidence}")
    samples = np.asarray(batch.samples, dtype=float)
    n = samples.size
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples to summarize, got {n}")

    mean = float(samples.mean())
    variance = float(np.mean((samples - mean) ** 2))
    std_error = math.sqrt(variance / n)
    half_width = float(sps.norm.ppf((1.0 + confidence) / 2.0)) * std_error
    efficiency = 1.0 / (variance * batch.wall_time) if variance > 0 and batch.wall_time > 0 else None

    return EstimateReport(
        estimator=batch.estimator_name,
        model=batch.model_name,
        n_customers=batch.n_customers,
        theta=batch.theta,
        n=n,
        mean=mean,
        sample_variance=variance,
        std_error=std_error,
        confidence=confidence,
        ci_low=mean - half_width,
        ci_high=mean + half_width,
        wall_time=batch.wall_time,
        model_evaluations=batch.model_evaluations,
        efficiency=efficiency,
        config_fingerprint=batch.config_fingerprint,
    )


def compare(a: EstimateReport, b: EstimateReport) -> ComparisonVerdict:
    """Compare CI widths after rescaling both runs to the same wall time.

    Width shrinks like 1/sqrt(time), so a's width is scaled by
    sqrt(wall_time_a) and b's by sqrt(wall_time_b) before taking the ratio.
    """
    if a.config_fingerprint != b.config_fingerprint:
        raise ComparisonError(
            f"reports describe different configurations ({a.config_fingerprint} vs {b.config_fingerprint})"
        )
    normalized = _ratio(a.ci_width * math.sqrt(a.wall_time), b.ci_width * math.sqrt(b.wall_time))
    efficiency_ratio = None
    if a.efficiency is not None and b.efficiency is not None:
        efficiency_ratio = a.efficiency / b.efficiency
    return ComparisonVerdict(
        estimator_a=a.estimator,
        estimator_b=b.estimator,
        width_ratio=_ratio(a.ci_width, b.ci_width),
        time_normalized_width_ratio=normalized,
        variance_ratio=_ratio(a.sample_variance, b.sample_variance),
        efficiency_ratio=efficiency_ratio,
        a_dominates=normalized < 1.0,
    )
