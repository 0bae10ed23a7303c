"""Central finite differences with common random numbers (verification oracle)."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from weakgrad.core.distributions import ParametricDistribution
from weakgrad.core.models import ModelSpec
from weakgrad.core.rng_streams import StreamSpec
from weakgrad.errors import ParameterError
from weakgrad.estimators.base import (
    EstimatorKind,
    GradientSampleBatch,
    inputs_from_uniforms,
    resolve_env,
    run_replications,
    uniform_width,
)


def default_fd_step(theta: float, *, positive: bool = False) -> float:
    """1e-3·max(1, |θ|), capped at θ/2 when θ must stay positive."""
    step = 1e-3 * max(1.0, abs(theta))
    return min(step, theta / 2.0) if positive else step


def shifted_env(spec: ModelSpec, env: Sequence[ParametricDistribution], delta: float) -> list:
    """Shift θ of every sensitive coordinate by ``delta``."""
    shifted = list(env)
    for i in spec.sensitive_inputs:
        try:
            shifted[i] = env[i].with_theta(env[i].theta + delta)
        except ParameterError as exc:
            raise ParameterError(f"step {delta:+g} leaves the admissible range of input {i}: {exc}") from exc
    return shifted


def finite_difference(
    spec: ModelSpec,
    dist_env: Optional[Sequence[ParametricDistribution]],
    n: Optional[int],
    h: Optional[float],
    stream: StreamSpec,
    *,
    time_budget_s: Optional[float] = None,
    block_size: Optional[int] = None,
    workers: Optional[int] = None,
) -> GradientSampleBatch:
    """(Y_{θ+h}(u) − Y_{θ−h}(u)) / 2h with shared uniforms u; ``h=None`` uses the default step."""
    env = resolve_env(spec, dist_env)
    if h is None:
        h = min(default_fd_step(env[i].theta, positive=env[i].support[0] >= 0.0) for i in spec.sensitive_inputs)
    if not h > 0:
        raise ParameterError(f"finite-difference step must be positive, got {h}")
    env_plus = shifted_env(spec, env, h)
    env_minus = shifted_env(spec, env, -h)

    def replicate(shared: np.ndarray) -> np.ndarray:
        y_plus = spec.evaluate_batch(inputs_from_uniforms(env_plus, shared))
        y_minus = spec.evaluate_batch(inputs_from_uniforms(env_minus, shared))
        return (y_plus - y_minus) / (2.0 * h)

    return run_replications(
        EstimatorKind.FD.value, spec, env, stream, replicate,
        width=uniform_width(env),
        evaluations_per_replication=2,
        n=n, time_budget_s=time_budget_s, block_size=block_size, workers=workers,
    )
