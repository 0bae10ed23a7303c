"""Plain importance sampling of an expectation under a nominal density.

Draws X from a proposal q and averages Y(X)·p(X)/q(X). Unbiased whenever
q(x) > 0 wherever Y(x)p(x) ≠ 0; draws that break this raise.
"""

from __future__ import annotations

import hashlib
import json
import time
from typing import Callable

import numpy as np

from weakgrad.core.distributions import ParametricDistribution, sample
from weakgrad.core.rng_streams import StreamSpec, make_stream
from weakgrad.errors import ParameterError, SupportViolationError
from weakgrad.estimators.base import GradientSampleBatch

Response = Callable[[np.ndarray], np.ndarray]


def likelihood_ratio(nominal: ParametricDistribution, proposal: ParametricDistribution, x: np.ndarray) -> np.ndarray:
    """p(x)/q(x); zero where p vanishes."""
    log_p = nominal.logpdf(x)
    log_q = proposal.logpdf(x)
    return np.where(np.isneginf(log_p), 0.0, np.exp(log_p - np.where(np.isneginf(log_q), 0.0, log_q)))


def importance_sampling_mean(
    response: Response,
    nominal: ParametricDistribution,
    proposal: ParametricDistribution,
    n: int,
    stream: StreamSpec,
) -> GradientSampleBatch:
    """Per-draw samples Y(X)p(X)/q(X), X ~ q; their mean estimates E_p[Y]."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    (p_lo, p_hi), (q_lo, q_hi) = nominal.support, proposal.support
    if q_lo > p_lo or q_hi < p_hi:
        raise SupportViolationError(
            f"proposal support [{q_lo}, {q_hi}] does not cover nominal support [{p_lo}, {p_hi}]"
        )
    start = time.perf_counter()
    x = np.asarray(sample(proposal, make_stream(stream), n))
    y = np.asarray(response(x), dtype=float)
    samples = y * likelihood_ratio(nominal, proposal, x)
    fingerprint = hashlib.sha256(
        json.dumps({"nominal": nominal.describe(), "proposal": proposal.describe()}, sort_keys=True).encode()
    ).hexdigest()[:16]
    return GradientSampleBatch(
        samples=samples,
        wall_time=time.perf_counter() - start,
        model_evaluations=n,
        estimator_name="importance_sampling",
        config_fingerprint=fingerprint,
        model_name="response",
    )
