"""Shared fixtures and toy models for the weakgrad test suite."""

from __future__ import annotations

from typing import Sequence

import numpy as np
import pytest

from weakgrad.config import get_settings
from weakgrad.core.distributions import Exponential, ParametricDistribution
from weakgrad.core.models import ModelSpec, mm1_spec, san_bridge_spec
from weakgrad.core.rng_streams import StreamSpec


class ConstantModel(ModelSpec):
    """Y ≡ 1 regardless of the inputs."""

    name = "constant"

    def __init__(self, distributions: Sequence[ParametricDistribution]) -> None:
        super().__init__(distributions, sensitive_inputs=range(len(distributions)))

    def evaluate_batch(self, values: np.ndarray) -> np.ndarray:
        return np.ones(values.shape[:-1])


class SumModel(ModelSpec):
    """Y = Σ Xᵢ over all coordinates."""

    name = "sum"

    def __init__(self, distributions: Sequence[ParametricDistribution]) -> None:
        super().__init__(distributions, sensitive_inputs=range(len(distributions)))

    def evaluate_batch(self, values: np.ndarray) -> np.ndarray:
        return values.sum(axis=-1)


@pytest.fixture(autouse=True)
def _fresh_settings():
    """Settings are cached per process; tests that patch the env need a clean cache."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(scope="module")
def mm1_single():
    return mm1_spec(1, service_mean=1.0, arrival_mean=2.0)


@pytest.fixture(scope="module")
def mm1_five():
    return mm1_spec(5, service_mean=1.0, arrival_mean=2.0)


@pytest.fixture(scope="module")
def bridge():
    return san_bridge_spec(arc_mean=1.0)


@pytest.fixture
def constant_model():
    return ConstantModel([Exponential(mean=1.0)] * 3)


@pytest.fixture
def sum_model():
    return SumModel([Exponential(mean=1.0)] * 3)


@pytest.fixture
def stream():
    return StreamSpec(master_seed=2024, substream_index=0)


def within_se(mean: float, target: float, std_error: float, k: float = 4.0) -> bool:
    return abs(mean - target) <= k * std_error
