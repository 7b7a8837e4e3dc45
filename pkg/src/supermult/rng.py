"""Addressable random streams.

Every random draw in the package goes through a :class:`SeededRng`, which
names a stream by ``(master_seed, stream_id)``. Two objects with the same
address produce the same numbers; different stream ids are statistically
independent (numpy ``SeedSequence`` spawn keys), so multistart runs and
experiment cells can each own a stream without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = 2**64


@dataclass(frozen=True)
class SeededRng:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) < _U64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, index: int) -> "SeededRng":
        """Derive a sub-stream; deterministic in ``(self, index)``."""
        seq = np.random.SeedSequence(
            entropy=int(self.master_seed), spawn_key=(int(self.stream_id), int(index))
        )
        return SeededRng(int(seq.generate_state(2, dtype=np.uint64)[0]), int(index))


def as_rng(rng) -> np.random.Generator:
    """Accept a SeededRng, a numpy Generator or an int seed."""
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return SeededRng(int(rng)).generator()
