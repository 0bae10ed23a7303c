"""Seeded, splittable uniform streams.

Each stream is keyed by ``(master_seed, substream_index, block)`` and backed by
a counter-based Philox generator, so substreams never share state and any block
of replications can be regenerated in isolation.

Estimators read uniforms through :class:`ReplicationUniforms`: replication
``j`` owns one fixed-width row, row ``j % REPLICATIONS_PER_BLOCK`` of stream
block ``j // REPLICATIONS_PER_BLOCK``. A replication's inputs therefore depend
only on the seed, the substream and ``j``, never on how a run is chunked.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, List, Tuple, Union

import numpy as np

from weakgrad.errors import ParameterError

_MANTISSA_BITS = 52
_SCALE = 2.0 ** -_MANTISSA_BITS
_SHIFT = np.uint64(64 - _MANTISSA_BITS)

REPLICATIONS_PER_BLOCK = 4096

Shape = Union[int, Tuple[int, ...]]


@dataclass(frozen=True)
class StreamSpec:
    """Identifies one uniform stream."""

    master_seed: int
    substream_index: int = 0
    block: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise ParameterError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.substream_index < 0:
            raise ParameterError(f"substream_index must be non-negative, got {self.substream_index}")
        if self.block < 0:
            raise ParameterError(f"block must be non-negative, got {self.block}")

    def for_block(self, block: int) -> "StreamSpec":
        return replace(self, block=block)


class UniformStream:
    """Single-consumer source of i.i.d. uniforms on the open interval (0, 1).

    Every uniform consumes exactly one 64-bit output, so drawing ``a`` then
    ``b`` values yields the same numbers as drawing ``a + b`` at once.
    """

    def __init__(self, spec: StreamSpec) -> None:
        self.spec = spec
        seed_seq = np.random.SeedSequence(
            entropy=spec.master_seed,
            spawn_key=(spec.substream_index, spec.block),
        )
        self._bit_generator = np.random.Philox(seed_seq)

    def uniforms(self, shape: Shape) -> np.ndarray:
        """Draw an array of uniforms; never exactly 0 or 1."""
        k = self._bit_generator.random_raw(shape) >> _SHIFT
        return (k.astype(np.float64) + 0.5) * _SCALE

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def __iter__(self) -> Iterator[float]:
        while True:
            yield self.uniform()


def make_stream(spec: StreamSpec) -> UniformStream:
    """Build the uniform stream identified by ``spec``."""
    return UniformStream(spec)


class ReplicationUniforms:
    """Sequential reader of per-replication uniform rows of a fixed width.

    Starts at replication ``start_block * REPLICATIONS_PER_BLOCK`` and crosses
    stream blocks transparently.
    """

    def __init__(self, stream: StreamSpec, width: int, *, start_block: int = 0) -> None:
        if width < 1:
            raise ParameterError(f"row width must be >= 1, got {width}")
        self._stream = stream
        self._width = width
        self._block = start_block
        self._used = 0
        self._current = make_stream(stream.for_block(start_block))

    @property
    def position(self) -> int:
        """Index of the next replication to be read."""
        return self._block * REPLICATIONS_PER_BLOCK + self._used

    def take(self, count: int) -> np.ndarray:
        """Rows for the next ``count`` replications, shape ``(count, width)``."""
        parts: List[np.ndarray] = []
        while count > 0:
            if self._used == REPLICATIONS_PER_BLOCK:
                self._block += 1
                self._used = 0
                self._current = make_stream(self._stream.for_block(self._block))
            rows = min(count, REPLICATIONS_PER_BLOCK - self._used)
            parts.append(self._current.uniforms((rows, self._width)))
            self._used += rows
            count -= rows
        if not parts:
            return np.empty((0, self._width))
        return parts[0] if len(parts) == 1 else np.concatenate(parts)
