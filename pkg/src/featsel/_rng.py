"""Deterministic pseudo-randomness for the whole package.

Every random choice in this package flows from an explicit 64-bit seed
through the generators defined here, so experiments are bit-reproducible:

* ``splitmix64`` expands one seed into independent sub-seeds and into the
  initial state of the main generator.
* ``Xoshiro256StarStar`` (Blackman/Vigna xoshiro256**) supplies the uniform
  stream.
* Standard normals come from the Box-Muller transform applied to pairs of
  uniforms; each pair of outputs consumes exactly two 64-bit draws, also for
  an odd tail, so the state advance is independent of how results are used.

Uniform doubles are ``((x >> 11) + 1) * 2**-53``, which lies in (0, 1] and
keeps ``log(u)`` finite for Box-Muller.  Integer draws below a bound use
rejection sampling, so they are exactly uniform.

The bulk-normal loop is implemented twice: here in Python and in the
compiled core.  Both follow the byte-identical recipe above; see
``featsel.backend``.
"""

from __future__ import annotations

import math

from . import backend

_MASK64 = (1 << 64) - 1

_SM64_GAMMA = 0x9E3779B97F4A7C15
_SM64_MUL1 = 0xBF58476D1CE4E5B9
_SM64_MUL2 = 0x94D049BB133111EB


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once; return ``(new_state, output)``."""
    state = (state + _SM64_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * _SM64_MUL1) & _MASK64
    z = ((z ^ (z >> 27)) * _SM64_MUL2) & _MASK64
    z ^= z >> 31
    return state, z


def derive_seeds(seed: int, count: int) -> list[int]:
    """Expand one 64-bit seed into ``count`` independent sub-seeds."""
    state = seed & _MASK64
    out = []
    for _ in range(count):
        state, z = splitmix64_next(state)
        out.append(z)
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** seeded from a 64-bit seed via splitmix64."""

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        state = seed
        s = []
        for _ in range(4):
            state, z = splitmix64_next(state)
            s.append(z)
        if not any(s):  # all-zero state is the one forbidden xoshiro state
            s[0] = 1
        self._s = s

    def next_uint64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def uniform(self) -> float:
        """Uniform double in (0, 1]."""
        return ((self.next_uint64() >> 11) + 1) * 2.0**-53

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection, exactly unbiased."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = ((1 << 64) // n) * n
        while True:
            x = self.next_uint64()
            if x < limit:
                return x % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle (descending index form)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def normals(self, count: int):
        """Return ``count`` standard normals as a float64 array.

        Delegates the Box-Muller loop to the active kernel backend; the
        stream consumed is identical either way.
        """
        out, state = backend.get().xoshiro_normals(
            self._s[0], self._s[1], self._s[2], self._s[3], count
        )
        self._s = list(state)
        return out
