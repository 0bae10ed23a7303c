"""Replication engine shared by every gradient estimator.

Every replication reads one fixed-width row of uniforms (see
:class:`~weakgrad.core.rng_streams.ReplicationUniforms`), so sample ``j`` is
the same whatever the block size, the worker count or the stopping rule:
serial and threaded runs agree, and a time-budgeted run is a prefix of the
fixed-n run with the same seed.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from weakgrad.config import get_settings
from weakgrad.core.distributions import ParametricDistribution
from weakgrad.core.models import ModelSpec
from weakgrad.core.rng_streams import REPLICATIONS_PER_BLOCK, ReplicationUniforms, StreamSpec
from weakgrad.errors import ParameterError, ShapeError

logger = logging.getLogger(__name__)

RowFn = Callable[[np.ndarray], np.ndarray]


class EstimatorKind(str, Enum):
    WD = "wd"
    ISWD = "iswd"
    SF = "sf"
    FD = "fd"


@dataclass
class GradientSampleBatch:
    """Per-replication samples from one estimator run, with cost accounting."""

    samples: np.ndarray
    wall_time: float
    model_evaluations: int
    estimator_name: str
    config_fingerprint: str
    model_name: str = ""
    n_customers: Optional[int] = None
    theta: float = math.nan

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float).ravel()
        if self.samples.size < 1:
            raise ParameterError("a sample batch needs at least one replication")

    @property
    def n(self) -> int:
        return int(self.samples.size)


# ---------------------------------------------------------------------------
# Input drawing
# ---------------------------------------------------------------------------

def resolve_env(spec: ModelSpec, dist_env: Optional[Sequence[ParametricDistribution]]) -> Tuple[ParametricDistribution, ...]:
    env = spec.input_distributions if dist_env is None else tuple(dist_env)
    if len(env) != spec.dimension:
        raise ShapeError(f"{spec.name} has {spec.dimension} inputs but {len(env)} distributions were given")
    return env


def group_columns(distributions: Sequence[ParametricDistribution], columns: Sequence[int]) -> List[Tuple[ParametricDistribution, List[int]]]:
    """Group coordinates that share one distribution, in first-seen order."""
    groups: Dict[ParametricDistribution, List[int]] = {}
    for col in columns:
        groups.setdefault(distributions[col], []).append(col)
    return list(groups.items())


def uniform_width(distributions: Sequence[ParametricDistribution]) -> int:
    return sum(d.uniforms_per_draw for d in distributions)


def inputs_from_uniforms(distributions: Sequence[ParametricDistribution], u: np.ndarray) -> np.ndarray:
    """Map a (size, uniform_width) block to a (size, dimension) input block.

    The uniform layout depends only on each family's ``uniforms_per_draw``, so
    distributions that differ only in θ consume identical uniforms.
    """
    offsets = np.concatenate([[0], np.cumsum([d.uniforms_per_draw for d in distributions])])
    out = np.empty((u.shape[0], len(distributions)))
    for dist, cols in group_columns(distributions, range(len(distributions))):
        idx = offsets[cols][:, None] + np.arange(dist.uniforms_per_draw)
        out[:, cols] = dist.from_uniforms(u[:, idx])
    return out


# ---------------------------------------------------------------------------
# Replication runner
# ---------------------------------------------------------------------------

def _budget_chunk(remaining_s: float, per_replication_s: float, block_size: int) -> int:
    """Replications to run next: at most half of what the remaining time affords."""
    if per_replication_s <= 0.0:
        return block_size
    return int(min(block_size, max(1.0, 0.5 * remaining_s / per_replication_s)))


def run_replications(
    estimator_name: str,
    spec: ModelSpec,
    env: Sequence[ParametricDistribution],
    stream: StreamSpec,
    replicate: RowFn,
    *,
    width: int,
    evaluations_per_replication: int,
    n: Optional[int] = None,
    time_budget_s: Optional[float] = None,
    block_size: Optional[int] = None,
    workers: Optional[int] = None,
) -> GradientSampleBatch:
    """Run replications until ``n`` exist or the time budget elapses.

    ``replicate`` maps a ``(size, width)`` block of uniform rows to ``size``
    samples, row by row. ``block_size`` caps how many rows are evaluated in one
    vectorized call and never changes the samples.
    """
    if (n is None) == (time_budget_s is None):
        raise ParameterError("exactly one of n and time_budget_s must be given")
    settings = get_settings()
    block_size = block_size or settings.BLOCK_SIZE
    workers = workers or settings.WORKERS
    if block_size < 1 or workers < 1:
        raise ParameterError("block_size and workers must be >= 1")

    def run_chunk(rows: ReplicationUniforms, size: int) -> np.ndarray:
        first = rows.position
        samples = replicate(rows.take(size))
        logger.debug("%s replications %d..%d", estimator_name, first, first + size - 1)
        return samples

    def run_stream_block(block: int) -> np.ndarray:
        rows = ReplicationUniforms(stream, width, start_block=block)
        end = min(n, (block + 1) * REPLICATIONS_PER_BLOCK)
        parts = []
        while rows.position < end:
            parts.append(run_chunk(rows, min(block_size, end - rows.position)))
        return np.concatenate(parts)

    start = time.perf_counter()
    chunks: List[np.ndarray] = []
    if n is not None:
        if n < 1:
            raise ParameterError(f"n must be >= 1, got {n}")
        n_blocks = math.ceil(n / REPLICATIONS_PER_BLOCK)
        if workers > 1 and n_blocks > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                chunks = list(pool.map(run_stream_block, range(n_blocks)))
        else:
            rows = ReplicationUniforms(stream, width)
            while rows.position < n:
                chunks.append(run_chunk(rows, min(block_size, n - rows.position)))
    else:
        if time_budget_s <= 0:
            raise ParameterError(f"time_budget_s must be positive, got {time_budget_s}")
        if workers > 1:
            logger.warning("%s: time-budgeted runs are serial; ignoring workers=%d", estimator_name, workers)
        rows = ReplicationUniforms(stream, width)
        size = 1
        # The clock is read after every chunk; chunks shrink to one replication near the deadline.
        while True:
            chunks.append(run_chunk(rows, size))
            elapsed = time.perf_counter() - start
            if elapsed >= time_budget_s:
                break
            size = _budget_chunk(time_budget_s - elapsed, elapsed / rows.position, block_size)
    wall_time = time.perf_counter() - start

    samples = np.concatenate(chunks)
    batch = GradientSampleBatch(
        samples=samples,
        wall_time=wall_time,
        model_evaluations=evaluations_per_replication * samples.size,
        estimator_name=estimator_name,
        config_fingerprint=spec.fingerprint(env),
        model_name=spec.name,
        n_customers=spec.n_customers,
        theta=env[spec.sensitive_inputs[0]].theta,
    )
    logger.info(
        "%s on %s: n=%d, model_evaluations=%d, wall_time=%.3fs",
        estimator_name, spec.name, batch.n, batch.model_evaluations, wall_time,
    )
    return batch
