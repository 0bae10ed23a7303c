"""LangGraph state definitions for the experiment runner."""

from __future__ import annotations

from enum import Enum
from typing import Any, Dict, List, Optional

from typing_extensions import TypedDict

from weakgrad.core.models import ModelSpec
from weakgrad.core.stats import ComparisonVerdict, EstimateReport
from weakgrad.experiment.config import ExperimentConfig


class RunStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"


class ExperimentState(TypedDict):
    """Explicit state schema – everything the runner needs flows through the graph."""

    config: ExperimentConfig
    model: Optional[ModelSpec]
    pending_cells: List[Dict[str, Any]]   # {"ordinal": int, "estimator": str}
    reports: List[EstimateReport]
    comparisons: List[ComparisonVerdict]
    output_path: Optional[str]
    status: str


def normalize_state(state: Dict[str, Any]) -> ExperimentState:
    """Guarantee every key exists with a safe default."""
    n: Dict[str, Any] = dict(state)
    n.setdefault("model", None)
    n.setdefault("pending_cells", [])
    if not isinstance(n["pending_cells"], list):
        n["pending_cells"] = []
    n.setdefault("reports", [])
    if not isinstance(n["reports"], list):
        n["reports"] = []
    n.setdefault("comparisons", [])
    n.setdefault("output_path", None)
    n.setdefault("status", RunStatus.PENDING.value)
    return n  # type: ignore[return-value]
