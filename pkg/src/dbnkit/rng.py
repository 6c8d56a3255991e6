"""Seedable pseudo-random number generator with a pinned-down stream.

The generator is xoshiro256** (Blackman & Vigna), seeded from a single
64-bit integer via the splitmix64 sequence. Both algorithms are public
and tiny, so an independent implementation in any language can reproduce
the streams exactly. The derived quantities are fixed as follows:

* raw draw: one xoshiro256** output, a uint64
* uniform in [0, 1): ``(raw >> 11) * 2**-53``
* uniform in (0, 1]: ``((raw >> 11) + 1) * 2**-53``
* standard normal: Box-Muller, consuming exactly two raw draws r1, r2
  per value: ``z = sqrt(-2*ln(u1)) * cos(2*pi*u2)`` with u1 in (0, 1]
  from r1 and u2 in [0, 1) from r2 (the sine partner is discarded)
* integer below n: rejection sampling, redrawing while
  ``raw >= 2**64 - (2**64 % n)``, then ``raw % n``
* permutation of n: Fisher-Yates, iterating i = n-1 .. 1 and swapping
  index i with ``randbelow(i + 1)``

An ``Rng`` is single-owner: never share one across threads. Parallel or
decoupled streams must derive child seeds with :func:`derive_seed`.
"""

import math

import numpy as np

from .errors import NegativeStddev

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_TWO53_INV = 2.0**-53


def _mix64(z: int) -> int:
    """splitmix64 output scrambler (Stafford variant 13 finalizer)."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def splitmix64_stream(seed: int, n: int) -> list[int]:
    """First n outputs of splitmix64 started at ``seed``."""
    state = seed & _MASK64
    out = []
    for _ in range(n):
        state = (state + _GOLDEN) & _MASK64
        out.append(_mix64(state))
    return out


def derive_seed(parent_seed: int, index: int) -> int:
    """Child seed for stream ``index`` of ``parent_seed``.

    Defined as ``mix64(parent ^ mix64(index ^ GOLDEN))`` where mix64 is
    the splitmix64 finalizer; deterministic and collision-resistant
    enough for decoupling epoch shuffles, layer seeds and the like.
    """
    return _mix64((parent_seed & _MASK64) ^ _mix64((index & _MASK64) ^ _GOLDEN))


class Rng:
    """xoshiro256** stream owned by a single consumer.

    Identical seeds give identical raw streams on every platform; the
    floating-point helpers are plain IEEE-754 double arithmetic on top
    of the raw stream.
    """

    __slots__ = ("seed", "_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._s0, self._s1, self._s2, self._s3 = splitmix64_stream(self.seed, 4)

    def next_u64(self) -> int:
        """One raw 64-bit output."""
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        x = (s1 * 5) & _MASK64
        result = (((x << 7) | (x >> 57)) & _MASK64) * 9 & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def _raw_block(self, n: int) -> np.ndarray:
        """n successive raw outputs as a uint64 array."""
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        out = [0] * n
        for i in range(n):
            x = (s1 * 5) & _MASK64
            out[i] = (((x << 7) | (x >> 57)) & _MASK64) * 9 & _MASK64
            t = (s1 << 17) & _MASK64
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return np.array(out, dtype=np.uint64)

    # --- floating point draws ---------------------------------------------

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """One double uniform on [lo, hi)."""
        u = (self.next_u64() >> 11) * _TWO53_INV
        return lo + u * (hi - lo)

    def uniforms(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """n doubles uniform on [lo, hi), consuming n raw draws."""
        if n == 0:
            return np.empty(0)
        u = (self._raw_block(n) >> np.uint64(11)).astype(np.float64) * _TWO53_INV
        if lo != 0.0 or hi != 1.0:
            u = lo + u * (hi - lo)
        return u

    def gaussians(self, n: int, mean: float = 0.0, stddev: float = 1.0) -> np.ndarray:
        """n draws from N(mean, stddev^2); consumes 2n raw draws."""
        if stddev < 0:
            raise NegativeStddev(f"stddev must be >= 0, got {stddev}")
        if n == 0:
            return np.empty(0)
        raw = self._raw_block(2 * n) >> np.uint64(11)
        u1 = (raw[0::2].astype(np.float64) + 1.0) * _TWO53_INV  # (0, 1]
        u2 = raw[1::2].astype(np.float64) * _TWO53_INV  # [0, 1)
        z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)
        return mean + stddev * z

    def gaussian(self, mean: float = 0.0, stddev: float = 1.0) -> float:
        """One draw from N(mean, stddev^2)."""
        return float(self.gaussians(1, mean, stddev)[0])

    # --- integers and permutations ----------------------------------------

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < threshold:
                return x % n

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates permutation of range(n)."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return np.array(perm, dtype=np.intp)

    def child(self, index: int) -> "Rng":
        """Independent stream derived from this generator's seed."""
        return Rng(derive_seed(self.seed, index))
