"""Gradient estimators and a name-based dispatcher."""

from __future__ import annotations

from typing import Callable, Dict, Optional, Sequence

from weakgrad.core.distributions import ParametricDistribution
from weakgrad.core.models import ModelSpec
from weakgrad.core.rng_streams import StreamSpec
from weakgrad.errors import UnsupportedCombinationError
from weakgrad.estimators.base import EstimatorKind, GradientSampleBatch, resolve_env, run_replications
from weakgrad.estimators.finite_difference import default_fd_step, finite_difference
from weakgrad.estimators.importance_sampling import importance_sampling_mean
from weakgrad.estimators.score_function import score_function
from weakgrad.estimators.weak_derivative import iswd, wd_classical

ESTIMATORS: Dict[EstimatorKind, Callable[..., GradientSampleBatch]] = {
    EstimatorKind.WD: wd_classical,
    EstimatorKind.ISWD: iswd,
    EstimatorKind.SF: score_function,
    EstimatorKind.FD: finite_difference,
}


def check_combination(
    kind: EstimatorKind,
    spec: ModelSpec,
    dist_env: Optional[Sequence[ParametricDistribution]] = None,
) -> None:
    """Raise ``UnsupportedCombinationError`` if ``kind`` cannot run on ``spec``."""
    env = resolve_env(spec, dist_env)
    for i in spec.sensitive_inputs:
        dist = env[i]
        if dist.designated_parameter is None:
            raise UnsupportedCombinationError(
                f"{kind.value} on {spec.name}: input {i} ({dist.family.value}) has no sensitivity parameter"
            )
        if kind in (EstimatorKind.WD, EstimatorKind.ISWD):
            try:
                dist.decomposition()
            except NotImplementedError as exc:
                raise UnsupportedCombinationError(f"{kind.value} on {spec.name}: {exc}") from exc
    for i, dist in enumerate(env):
        if dist.support[0] < 0:
            raise UnsupportedCombinationError(
                f"{spec.name} needs positive inputs but input {i} is {dist.family.value}"
            )


def run_estimator(
    kind: EstimatorKind | str,
    spec: ModelSpec,
    stream: StreamSpec,
    *,
    dist_env: Optional[Sequence[ParametricDistribution]] = None,
    n: Optional[int] = None,
    time_budget_s: Optional[float] = None,
    fd_step: Optional[float] = None,
    block_size: Optional[int] = None,
    workers: Optional[int] = None,
) -> GradientSampleBatch:
    kind = EstimatorKind(kind)
    check_combination(kind, spec, dist_env)
    options = dict(time_budget_s=time_budget_s, block_size=block_size, workers=workers)
    if kind is EstimatorKind.FD:
        return finite_difference(spec, dist_env, n, fd_step, stream, **options)
    return ESTIMATORS[kind](spec, dist_env, n, stream, **options)


__all__ = [
    "ESTIMATORS",
    "EstimatorKind",
    "GradientSampleBatch",
    "check_combination",
    "default_fd_step",
    "finite_difference",
    "importance_sampling_mean",
    "iswd",
    "run_estimator",
    "run_replications",
    "score_function",
    "wd_classical",
]
