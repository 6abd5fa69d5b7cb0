"""Seedable, splittable random streams.

All samplers consume from an explicit :class:`RngStream` argument; there is
no global generator. A stream is identified by a 64-bit seed plus a spawn
key, so Monte-Carlo work can be split into blocks whose sub-streams depend
only on (seed, block index) and never on worker count or scheduling order.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RngStream"]


class RngStream:
    """A named random stream backed by PCG64.

    Identical ``(seed, key)`` pairs reproduce identical sample sequences
    across runs and platforms. A single stream is single-consumer; use
    :meth:`substream` to derive independent streams for concurrent work.
    """

    __slots__ = ("seed", "key", "_gen")

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def substream(self, *indices: int) -> "RngStream":
        """Derive the independent child stream at ``key + indices``.

        Children derived with distinct indices are statistically independent
        of each other and of the parent, and depend only on the root seed
        and the index path.
        """
        return RngStream(self.seed, self.key + indices)

    # Thin pass-throughs to the underlying generator; keeping them explicit
    # documents exactly which draws the toolkit depends on.
    def normal(self, size=None) -> np.ndarray | float:
        return self._gen.standard_normal(size)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low: int, high: int, size=None):
        return self._gen.integers(low, high, size=size)

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, key={self.key})"
