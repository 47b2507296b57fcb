"""Reproducible random streams for parallel Monte Carlo.

Each replication owns its own counter-based stream derived from
``(master_seed, stream_index)``, so results are identical under any
worker schedule: stream ``i`` always produces the same draw sequence
regardless of which process runs it or in what order.
"""
from __future__ import annotations

import numpy as np

_U64_MAX = 2**64 - 1


class RngStream:
    """One independent draw stream of a splittable generator.

    Identical ``(master_seed, stream_index)`` pairs yield bit-identical
    draw sequences on every platform (Philox is counter based and does
    not depend on hardware word order). A stream is single-owner: never
    share one instance across threads.
    """

    def __init__(self, master_seed: int, stream_index: int = 0):
        if not 0 <= master_seed <= _U64_MAX:
            raise ValueError("master_seed must fit in an unsigned 64-bit int")
        if not 0 <= stream_index <= _U64_MAX:
            raise ValueError("stream_index must fit in an unsigned 64-bit int")
        self.master_seed = master_seed
        self.stream_index = stream_index
        self._gen = np.random.Generator(
            np.random.Philox(
                np.random.SeedSequence(master_seed, spawn_key=(stream_index,))
            )
        )

    def uniform(self) -> float:
        """One double in [0, 1); consumes exactly one draw."""
        return float(self._gen.random())

    def uniforms(self, *shape: int) -> np.ndarray:
        """Array of doubles in [0, 1); consumes prod(shape) draws in
        the same order as repeated :meth:`uniform` calls."""
        return self._gen.random(shape)

    def pick(self, n: int) -> int:
        """Uniform index in {0, ..., n-1}; consumes exactly one draw."""
        if n <= 0:
            raise ValueError("pick needs n >= 1")
        return min(int(self.uniform() * n), n - 1)

    def reset(self) -> None:
        """Rewind the stream to its initial state."""
        self._gen = np.random.Generator(
            np.random.Philox(
                np.random.SeedSequence(
                    self.master_seed, spawn_key=(self.stream_index,)
                )
            )
        )

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"
