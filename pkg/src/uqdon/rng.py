"""Deterministic, counter-based random streams built on Philox.

Every source of randomness in the package is a (seed, stream) pair fed to
the Philox-4x64 counter generator. Distinct stream ids give statistically
independent sequences from one master seed, and the same
(seed, stream, counter) triple reproduces identical bits on any platform,
regardless of thread scheduling.

Stream-id conventions used elsewhere in the package:
  * ensemble member i draws mini-batch indices from stream i,
  * member i draws its initial parameters from stream i + n_members,
  * the query draw shared by all members uses stream 2 * n_members,
  * dataset pair i is generated from stream i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """One logical random stream: a Philox key plus a block counter.

    ``block(t)`` returns a fresh generator positioned at counter block t.
    Blocks are spaced 2**192 draws apart, so draws inside block t can never
    run into block t+1. This is what makes per-iteration sampling a pure
    function of (seed, stream, iteration).
    """

    seed: int
    stream: int = 0
    counter: int = field(default=0, compare=False)

    def __post_init__(self):
        if not (-(2**63) <= self.seed < 2**64):
            raise ValueError(f"seed {self.seed} does not fit in 64 bits")
        if not (0 <= self.stream < 2**64):
            raise ValueError(f"stream id {self.stream} does not fit in 64 bits")

    def _key(self) -> np.ndarray:
        return np.array([self.seed & (2**64 - 1), self.stream], dtype=np.uint64)

    def block(self, index: int) -> np.random.Generator:
        """Generator positioned at counter block ``index`` (>= 0)."""
        if index < 0:
            raise ValueError("counter block must be nonnegative")
        counter = np.array([0, 0, 0, index], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=self._key(), counter=counter))

    def generator(self) -> np.random.Generator:
        """Generator at the stream's own counter block."""
        return self.block(self.counter)

    def substream(self, stream: int) -> "RngStream":
        """Same master seed, different stream id."""
        return RngStream(self.seed, stream)
