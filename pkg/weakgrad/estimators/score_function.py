"""Score-function (likelihood-ratio) gradient estimator."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from weakgrad.core.distributions import ParametricDistribution, score
from weakgrad.core.models import ModelSpec
from weakgrad.core.rng_streams import StreamSpec
from weakgrad.estimators.base import (
    EstimatorKind,
    GradientSampleBatch,
    group_columns,
    inputs_from_uniforms,
    resolve_env,
    run_replications,
    uniform_width,
)


def score_function(
    spec: ModelSpec,
    dist_env: Optional[Sequence[ParametricDistribution]],
    n: Optional[int],
    stream: StreamSpec,
    *,
    time_budget_s: Optional[float] = None,
    block_size: Optional[int] = None,
    workers: Optional[int] = None,
) -> GradientSampleBatch:
    """Y(X)·Σᵢ ∂ln fᵢ(Xᵢ)/∂θ per replication; draws match ``iswd`` uniform for uniform."""
    env = resolve_env(spec, dist_env)

    def replicate(u: np.ndarray) -> np.ndarray:
        x = inputs_from_uniforms(env, u)
        total_score = np.zeros(u.shape[0])
        for dist, cols in group_columns(env, spec.sensitive_inputs):
            total_score += np.asarray(score(dist, x[:, cols])).sum(axis=1)
        return spec.evaluate_batch(x) * total_score

    return run_replications(
        EstimatorKind.SF.value, spec, env, stream, replicate,
        width=uniform_width(env),
        evaluations_per_replication=1,
        n=n, time_budget_s=time_budget_s, block_size=block_size, workers=workers,
    )
