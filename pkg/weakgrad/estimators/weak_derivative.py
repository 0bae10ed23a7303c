"""Weak-derivative gradient estimators.

``wd_classical`` resimulates the model with each sensitive coordinate replaced
by draws from f⁺ and f⁻ (2 evaluations per sensitive coordinate).
``iswd`` keeps the nominal draw and reweights one evaluation by
c(θ)(f⁺ − f⁻)/f, so it costs a single evaluation per replication.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from weakgrad.core.distributions import DecompositionTriple, ParametricDistribution, decomposition, likelihood_ratio_weight
from weakgrad.core.models import ModelSpec, substitute
from weakgrad.core.rng_streams import StreamSpec
from weakgrad.errors import SupportViolationError
from weakgrad.estimators.base import (
    EstimatorKind,
    GradientSampleBatch,
    group_columns,
    inputs_from_uniforms,
    resolve_env,
    run_replications,
    uniform_width,
)

logger = logging.getLogger(__name__)


def wd_classical(
    spec: ModelSpec,
    dist_env: Optional[Sequence[ParametricDistribution]],
    n: Optional[int],
    stream: StreamSpec,
    *,
    time_budget_s: Optional[float] = None,
    block_size: Optional[int] = None,
    workers: Optional[int] = None,
) -> GradientSampleBatch:
    """Σᵢ c(θ)·(Y(X with Xᵢ⁺) − Y(X with Xᵢ⁻)) per replication."""
    env = resolve_env(spec, dist_env)
    triples = {i: decomposition(env[i]) for i in spec.sensitive_inputs}
    logger.debug("wd on %s: %d sensitive input(s), c=%s", spec.name, len(triples),
                 sorted({t.c for t in triples.values()}))

    # Row layout: nominal inputs, then (X⁺ᵢ, X⁻ᵢ) uniforms per sensitive coordinate.
    base_width = uniform_width(env)
    layout: List[Tuple[int, DecompositionTriple, slice, slice]] = []
    offset = base_width
    for i in spec.sensitive_inputs:
        triple = triples[i]
        plus = slice(offset, offset + triple.plus_part.uniforms_per_draw)
        minus = slice(plus.stop, plus.stop + triple.minus_part.uniforms_per_draw)
        layout.append((i, triple, plus, minus))
        offset = minus.stop

    def replicate(u: np.ndarray) -> np.ndarray:
        base = inputs_from_uniforms(env, u[:, :base_width])
        total = np.zeros(u.shape[0])
        for i, triple, plus, minus in layout:
            x_plus = triple.plus_part.from_uniforms(u[:, plus])
            x_minus = triple.minus_part.from_uniforms(u[:, minus])
            y_plus = spec.evaluate_batch(substitute(base, i, x_plus))
            y_minus = spec.evaluate_batch(substitute(base, i, x_minus))
            total += triple.c * (y_plus - y_minus)
        return total

    return run_replications(
        EstimatorKind.WD.value, spec, env, stream, replicate,
        width=offset,
        evaluations_per_replication=2 * len(spec.sensitive_inputs),
        n=n, time_budget_s=time_budget_s, block_size=block_size, workers=workers,
    )


def iswd_weights(spec: ModelSpec, env: Sequence[ParametricDistribution], x: np.ndarray) -> np.ndarray:
    """Σᵢ c(θ)(f⁺(Xᵢ) − f⁻(Xᵢ))/f(Xᵢ) over the sensitive coordinates of a block."""
    weights = np.zeros(x.shape[0])
    for dist, cols in group_columns(env, spec.sensitive_inputs):
        values = x[:, cols]
        zero_density = np.isneginf(dist.logpdf(values))
        if np.any(zero_density):
            coordinate = cols[int(np.argwhere(zero_density)[0][1])]
            raise SupportViolationError(f"nominal density is zero at input coordinate {coordinate}")
        weights += np.asarray(likelihood_ratio_weight(dist, values)).sum(axis=1)
    return weights


def iswd(
    spec: ModelSpec,
    dist_env: Optional[Sequence[ParametricDistribution]],
    n: Optional[int],
    stream: StreamSpec,
    *,
    time_budget_s: Optional[float] = None,
    block_size: Optional[int] = None,
    workers: Optional[int] = None,
) -> GradientSampleBatch:
    """Y(X)·Σᵢ c(θ)(f⁺(Xᵢ) − f⁻(Xᵢ))/f(Xᵢ) per replication."""
    env = resolve_env(spec, dist_env)
    for i in spec.sensitive_inputs:
        decomposition(env[i])

    def replicate(u: np.ndarray) -> np.ndarray:
        x = inputs_from_uniforms(env, u)
        return spec.evaluate_batch(x) * iswd_weights(spec, env, x)

    return run_replications(
        EstimatorKind.ISWD.value, spec, env, stream, replicate,
        width=uniform_width(env),
        evaluations_per_replication=1,
        n=n, time_budget_s=time_budget_s, block_size=block_size, workers=workers,
    )
