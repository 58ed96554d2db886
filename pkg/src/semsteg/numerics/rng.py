"""Seeded random source.

Backed by numpy's Philox counter-based bit generator, so identical seeds and
identical call sequences give identical streams.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *keys) -> int:
    """Deterministic 64-bit child seed from a parent seed and integer/str keys."""
    words = [int(seed) & _MASK64]
    for key in keys:
        if isinstance(key, str):
            words.extend(key.encode("utf-8"))
        else:
            words.append(int(key) & _MASK64)
    ss = np.random.SeedSequence(words)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class Rng:
    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.Philox(self.seed))

    def spawn(self, *keys) -> "Rng":
        """Independent generator for a worker index or named purpose."""
        return Rng(derive_seed(self.seed, *keys))

    def normal(self, shape) -> np.ndarray:
        return self._gen.standard_normal(shape)

    def uniform(self, low, high, shape=None) -> np.ndarray:
        return self._gen.uniform(low, high, shape)

    def integers(self, low, high=None, shape=None) -> np.ndarray:
        return self._gen.integers(low, high, shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def __repr__(self):
        return f"Rng(seed={self.seed})"


def gauss_sample(rng: Rng, shape) -> Tensor:
    """I.i.d. standard normal tensor."""
    shape = tuple(shape) if not isinstance(shape, int) else (shape,)
    if not shape:
        raise ValueError("shape must be nonempty")
    return Tensor(rng.normal(shape))
