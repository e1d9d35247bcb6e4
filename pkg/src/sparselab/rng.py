"""Deterministic counter-based PRNG used everywhere randomness is needed.

numpy's generators are stable within a release but not contractually
bit-stable across releases, and reproducibility of hashes, model
initialization, and sweep rows is a hard requirement here.  This module
implements splitmix64 -- a 64-bit counter pushed through a finalizing mixer
-- plus the uniform / Gaussian / permutation helpers the rest of the package
draws from.  Scalar paths use plain Python ints; batch paths use uint64
arrays, whose silent modular wraparound is exactly the arithmetic we want.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

U64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15  # splitmix64 counter increment

_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """splitmix64 finalizer on a plain Python int; result in [0, 2**64)."""
    z &= U64
    z = ((z ^ (z >> 30)) * _MIX1) & U64
    z = ((z ^ (z >> 27)) * _MIX2) & U64
    return z ^ (z >> 31)


def mix64_array(z: NDArray[np.uint64]) -> NDArray[np.uint64]:
    """Vectorized :func:`mix64`; bit-identical to the scalar path."""
    z = np.asarray(z, dtype=np.uint64).copy()
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z


def derive_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed (order-sensitive).

    Used to split a global seed into independent per-component streams,
    e.g. ``derive_seed(global_seed, grid_index, trial_index)``.
    """
    acc = 0
    for part in parts:
        acc = mix64(((acc ^ (part & U64)) + GOLDEN) & U64)
    return acc


def float64_bits(x: NDArray[np.float64]) -> NDArray[np.uint64]:
    """Canonical IEEE-754 bit patterns of float64 values.

    Adding +0.0 first collapses -0.0 onto +0.0 so the two hash alike.
    """
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64) + 0.0)
    return arr.view(np.uint64)


class Stream:
    """Counter-based random stream: draw ``i`` is a pure function of (seed, i).

    The scalar and block paths walk the same counter, so interleaving
    ``next_u64`` and ``u64_block`` calls yields the same overall sequence.
    """

    def __init__(self, seed: int):
        self.seed = seed & U64
        self._count = 0

    def next_u64(self) -> int:
        self._count += 1
        return mix64((self.seed + self._count * GOLDEN) & U64)

    def u64_block(self, n: int) -> NDArray[np.uint64]:
        if n < 0:
            raise ValueError(f"block size must be >= 0, got {n}")
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        return mix64_array(np.uint64(self.seed) + idx * np.uint64(GOLDEN))

    def uniforms(self, n: int) -> NDArray[np.float64]:
        """i.i.d. uniform on [0, 1) with 53-bit resolution."""
        return (self.u64_block(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normals(self, n: int) -> NDArray[np.float64]:
        """i.i.d. standard normals via Box-Muller.

        Consumes exactly ``2 * ceil(n / 2)`` raw draws so the stream position
        after the call depends only on ``n``.
        """
        m = (n + 1) // 2
        raw = self.u64_block(2 * m)
        # u1 in (0, 1] keeps the log finite; u2 in [0, 1).
        u1 = ((raw[:m] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
        u2 = (raw[m:] >> np.uint64(11)).astype(np.float64) * 2.0**-53
        r = np.sqrt(-2.0 * np.log(u1))
        out = np.empty(2 * m)
        out[0::2] = r * np.cos(2.0 * np.pi * u2)
        out[1::2] = r * np.sin(2.0 * np.pi * u2)
        return out[:n]

    def integers(self, n: int, bound: int) -> NDArray[np.int64]:
        """i.i.d. integers uniform on [0, bound)."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        vals = (self.uniforms(n) * bound).astype(np.int64)
        return np.minimum(vals, bound - 1)

    def permutation(self, n: int) -> NDArray[np.int64]:
        """Uniform random permutation of range(n)."""
        return np.argsort(self.u64_block(n), kind="stable").astype(np.int64)

    def spawn(self, tag: int) -> "Stream":
        """Child stream independent of how much the parent has consumed."""
        return Stream(derive_seed(self.seed, tag))
