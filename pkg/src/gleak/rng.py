"""Named deterministic random streams.

Every stochastic operation in the package draws from a stream identified by a
(master seed, name) pair.  Streams are counter-based (Philox keyed on a hash
of the name), so the same pair always yields the same sequence and distinct
names yield statistically independent sequences regardless of creation order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1


def _key_for(master_seed: int, name: str) -> np.ndarray:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    words = np.frombuffer(digest[:16], dtype=np.uint64).copy()
    words[0] ^= np.uint64(master_seed & _MASK64)
    words[1] ^= np.uint64((master_seed >> 64) & _MASK64)
    return words


@dataclass(frozen=True)
class SeedProvenance:
    """Record of which stream produced a sampled artifact."""

    master_seed: int
    stream: str


@dataclass(frozen=True)
class Stream:
    """A named random stream: a numpy Generator plus its provenance."""

    master_seed: int
    name: str
    gen: np.random.Generator = field(repr=False, compare=False)

    @property
    def provenance(self) -> SeedProvenance:
        return SeedProvenance(self.master_seed, self.name)

    def child(self, suffix: str) -> "Stream":
        return stream(self.master_seed, f"{self.name}/{suffix}")


def stream(master_seed: int, name: str) -> Stream:
    """Create the stream identified by (master_seed, name).

    Deterministic: repeated calls with the same arguments produce generators
    that emit identical sequences.
    """
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    gen = np.random.Generator(np.random.Philox(key=_key_for(master_seed, name)))
    return Stream(master_seed, name, gen)
