"""Deterministic performance maps Y(X) for the built-in stochastic networks.

- ``MM1Spec``  system time of the N-th customer in an FCFS single-server queue
- ``SANSpec``  longest source-to-sink path of a stochastic activity network

Models are immutable and ``evaluate_batch`` is reentrant, so parallel
replication blocks may share one spec.
"""

from __future__ import annotations

import hashlib
import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from weakgrad.core.distributions import Exponential, ParametricDistribution
from weakgrad.errors import DomainError, InputIndexError, ParameterError, ShapeError


class ModelKind(str, Enum):
    MM1 = "mm1"
    SAN_BRIDGE = "san_bridge"


# ===================================================================
# Input vectors
# ===================================================================

@dataclass(frozen=True, eq=False)
class InputVector:
    """Flat, read-only vector of realized inputs.

    M/M/1 layout is ``[X_1..X_N, A_1..A_N]``; SAN layout is arc durations by
    arc index.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ShapeError(f"input vector must be a non-empty 1-D sequence, got shape {arr.shape}")
        if not np.all(np.isfinite(arr) & (arr > 0)):
            raise DomainError("all input coordinates must be strictly positive and finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_queue(cls, service_times: Sequence[float], interarrival_times: Sequence[float]) -> "InputVector":
        if len(service_times) != len(interarrival_times) or len(service_times) < 1:
            raise ShapeError(
                f"service and interarrival lists must have equal length >= 1, "
                f"got {len(service_times)} and {len(interarrival_times)}"
            )
        return cls(np.concatenate([np.asarray(service_times, float), np.asarray(interarrival_times, float)]))

    @classmethod
    def from_durations(cls, durations: Sequence[float]) -> "InputVector":
        return cls(np.asarray(durations, dtype=float))

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InputVector):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    def __hash__(self) -> int:
        return hash(self.values.tobytes())


VectorLike = Union[InputVector, np.ndarray]


# ===================================================================
# Model specs
# ===================================================================

class ModelSpec(ABC):
    """A performance map plus the distributions and sensitive coordinates of its inputs."""

    name: str = "model"

    def __init__(
        self,
        input_distributions: Sequence[ParametricDistribution],
        sensitive_inputs: Sequence[int],
    ) -> None:
        self.input_distributions: Tuple[ParametricDistribution, ...] = tuple(input_distributions)
        self.sensitive_inputs: Tuple[int, ...] = tuple(int(i) for i in sensitive_inputs)
        if not self.sensitive_inputs:
            raise ParameterError("sensitive_inputs must be non-empty")
        for i in self.sensitive_inputs:
            if not 0 <= i < self.dimension:
                raise InputIndexError(f"sensitive input {i} outside 0..{self.dimension - 1}")

    @property
    def dimension(self) -> int:
        return len(self.input_distributions)

    @property
    def theta(self) -> float:
        return self.input_distributions[self.sensitive_inputs[0]].theta

    @property
    def n_customers(self) -> Optional[int]:
        return None

    @abstractmethod
    def evaluate_batch(self, values: np.ndarray) -> np.ndarray:
        """Vectorised Y over the leading axes of ``values[..., dimension]``."""

    def describe(self, distributions: Optional[Sequence[ParametricDistribution]] = None) -> Dict[str, Any]:
        dists = self.input_distributions if distributions is None else tuple(distributions)
        return {
            "model": self.name,
            "dimension": self.dimension,
            "sensitive_inputs": list(self.sensitive_inputs),
            "distributions": [d.describe() for d in dists],
        }

    def fingerprint(self, distributions: Optional[Sequence[ParametricDistribution]] = None) -> str:
        canonical = json.dumps(self.describe(distributions), sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


class MM1Spec(ModelSpec):
    """FCFS single server; Y = T_N via Lindley's recursion with T_1 = X_1."""

    name = ModelKind.MM1.value

    def __init__(
        self,
        n_customers: int,
        service_dist: ParametricDistribution,
        interarrival_dist: ParametricDistribution,
    ) -> None:
        if n_customers < 1:
            raise ParameterError(f"n_customers must be >= 1, got {n_customers}")
        self._n = int(n_customers)
        self.service_dist = service_dist
        self.interarrival_dist = interarrival_dist
        super().__init__(
            input_distributions=[service_dist] * self._n + [interarrival_dist] * self._n,
            sensitive_inputs=range(self._n),
        )

    @property
    def n_customers(self) -> Optional[int]:
        return self._n

    def evaluate_batch(self, values: np.ndarray) -> np.ndarray:
        service = values[..., : self._n]
        arrivals = values[..., self._n :]
        # A_1 is unused: the first customer finds the system empty.
        system_time = service[..., 0]
        for k in range(1, self._n):
            system_time = service[..., k] + np.maximum(0.0, system_time - arrivals[..., k])
        return np.asarray(system_time, dtype=float)


class SANSpec(ModelSpec):
    """Longest-path duration of a DAG whose arcs carry an ``index`` attribute."""

    name = ModelKind.SAN_BRIDGE.value

    def __init__(
        self,
        graph: nx.DiGraph,
        arc_distributions: Sequence[ParametricDistribution],
        sensitive_inputs: Optional[Sequence[int]] = None,
    ) -> None:
        if not nx.is_directed_acyclic_graph(graph):
            raise ParameterError("activity network must be a DAG")
        sources = [v for v, deg in graph.in_degree() if deg == 0]
        sinks = [v for v, deg in graph.out_degree() if deg == 0]
        if len(sources) != 1 or len(sinks) != 1:
            raise ParameterError(f"activity network needs one source and one sink, got {sources} and {sinks}")
        indices = sorted(data["index"] for _, _, data in graph.edges(data=True))
        if indices != list(range(graph.number_of_edges())):
            raise ParameterError("arc indices must be exactly 0..m-1")
        if len(arc_distributions) != graph.number_of_edges():
            raise ShapeError(f"need {graph.number_of_edges()} arc distributions, got {len(arc_distributions)}")

        self.graph = graph
        self.source, self.sink = sources[0], sinks[0]
        order = list(nx.topological_sort(graph))
        self._incoming: List[Tuple[Any, List[Tuple[Any, int]]]] = [
            (v, [(u, graph.edges[u, v]["index"]) for u in graph.predecessors(v)])
            for v in order
            if v != self.source
        ]
        super().__init__(
            input_distributions=arc_distributions,
            sensitive_inputs=range(graph.number_of_edges()) if sensitive_inputs is None else sensitive_inputs,
        )

    def evaluate_batch(self, values: np.ndarray) -> np.ndarray:
        finish = {self.source: np.zeros(values.shape[:-1])}
        for node, arcs in self._incoming:
            candidates = [finish[u] + values[..., idx] for u, idx in arcs]
            finish[node] = candidates[0] if len(candidates) == 1 else np.maximum.reduce(candidates)
        return np.asarray(finish[self.sink], dtype=float)


# ===================================================================
# Builders
# ===================================================================

BRIDGE_ARCS: Tuple[Tuple[str, str], ...] = (
    ("s", "a"),  # a1
    ("s", "b"),  # a2
    ("a", "b"),  # a3
    ("a", "t"),  # a4
    ("b", "t"),  # a5
)


def mm1_spec(
    n_customers: int,
    service_mean: float = 1.0,
    arrival_mean: float = 2.0,
    *,
    service_dist: Optional[ParametricDistribution] = None,
    arrival_dist: Optional[ParametricDistribution] = None,
) -> MM1Spec:
    return MM1Spec(
        n_customers=n_customers,
        service_dist=service_dist or Exponential(mean=service_mean),
        interarrival_dist=arrival_dist or Exponential(mean=arrival_mean),
    )


def san_bridge_spec(arc_mean: float = 1.0, *, arc_dist: Optional[ParametricDistribution] = None) -> SANSpec:
    """Five-arc bridge with paths a1a4, a1a3a5, a2a5; every arc sensitive."""
    graph = nx.DiGraph()
    for index, (u, v) in enumerate(BRIDGE_ARCS):
        graph.add_edge(u, v, index=index)
    dist = arc_dist or Exponential(mean=arc_mean)
    return SANSpec(graph, [dist] * len(BRIDGE_ARCS))


# ===================================================================
# Operations
# ===================================================================

def _as_array(x: VectorLike) -> np.ndarray:
    return x.values if isinstance(x, InputVector) else np.asarray(x, dtype=float)


def evaluate(spec: ModelSpec, x: VectorLike) -> Union[float, np.ndarray]:
    """Y(x) for one vector (float) or a batch (array over leading axes)."""
    arr = _as_array(x)
    if arr.ndim == 0 or arr.shape[-1] != spec.dimension:
        raise ShapeError(f"{spec.name} expects {spec.dimension} coordinates, got shape {arr.shape}")
    result = spec.evaluate_batch(arr)
    return float(result) if arr.ndim == 1 else result


def substitute(
    x: VectorLike,
    index: int,
    value: Union[float, np.ndarray],
    *,
    spec: Optional[ModelSpec] = None,
) -> VectorLike:
    """Copy of ``x`` with coordinate ``index`` replaced; all others untouched.

    An ``InputVector`` result is revalidated, so a non-positive value raises
    ``DomainError``; raw batches (signed inputs included) are not checked.
    """
    arr = _as_array(x)
    width = arr.shape[-1]
    if not 0 <= index < width:
        raise InputIndexError(f"index {index} outside 0..{width - 1}")
    if spec is not None and index not in spec.sensitive_inputs:
        raise InputIndexError(f"index {index} is not a sensitive input of {spec.name}")
    out = arr.copy()
    out[..., index] = value
    return InputVector(out) if isinstance(x, InputVector) else out
