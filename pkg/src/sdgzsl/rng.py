"""Deterministic pseudo-random streams for data generation and training.

Everything downstream of a seed is produced by SplitMix64 (the 64-bit
splittable mixer of Steele, Lea and Flood) plus Box-Muller for normal
deviates.  The algorithm is short enough to re-implement from this file
alone, so a port in any language reproduces datasets and weight
initializations bit-for-bit at f64 precision.

Draw conventions, fixed forever:

* ``uniform()`` is ``(next_u64() >> 11) * 2**-53`` in ``[0, 1)``.
* Gaussians come in Box-Muller pairs from two consecutive u64 draws,
  ``u1 = ((a >> 11) + 1) * 2**-53`` in ``(0, 1]`` and
  ``u2 = (b >> 11) * 2**-53``; the cosine variate is returned first and
  the sine variate is cached for the next call.
* ``below(n)`` is ``next_u64() % n`` (the modulo bias at 2**-64 is
  irrelevant at these ranges and keeps the recipe one line).
* ``shuffle`` is a backward Fisher-Yates using ``below``.
* ``split()`` seeds a child stream with one u64 from the parent.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """Splittable 64-bit generator; one instance per independent stream."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64
        self._spare_gauss: float | None = None

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def split(self) -> "SplitMix64":
        """Derive an independent child stream."""
        return SplitMix64(self.next_u64())

    def uniform(self) -> float:
        """f64 in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def gauss(self) -> float:
        """Standard normal deviate (Box-Muller, pair-cached)."""
        if self._spare_gauss is not None:
            z = self._spare_gauss
            self._spare_gauss = None
            return z
        u1 = ((self.next_u64() >> 11) + 1) * 2.0**-53  # (0, 1], keeps log finite
        u2 = (self.next_u64() >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare_gauss = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def gauss_array(self, shape) -> np.ndarray:
        out = np.empty(int(np.prod(shape)), dtype=np.float64)
        for i in range(out.size):
            out[i] = self.gauss()
        return out.reshape(shape)

    def uniform_array(self, low: float, high: float, shape) -> np.ndarray:
        out = np.empty(int(np.prod(shape)), dtype=np.float64)
        span = high - low
        for i in range(out.size):
            out[i] = low + span * self.uniform()
        return out.reshape(shape)

    def below(self, n: int) -> int:
        """Integer in [0, n)."""
        return self.next_u64() % n

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of range(n)."""
        idx = np.arange(n)
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return idx
