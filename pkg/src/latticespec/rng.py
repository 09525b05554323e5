"""Counter-based random numbers addressed by (seed, stream, site).

Every innovation on Z^2 is a pure function of the seed, a stream id and the
site coordinates, so a coupled field can replace any single innovation
without replaying a sequential stream.  The mixer is the SplitMix64
finalizer applied twice with seed-derived keys.
"""
from __future__ import annotations

import numpy as np
from scipy import special

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# site coordinates are offset into 24 bits each; |s| < 2**23
_COORD_BITS = 24
_COORD_OFFSET = 1 << (_COORD_BITS - 1)


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * _M1) & _MASK
    x = ((x ^ (x >> 27)) * _M2) & _MASK
    return x ^ (x >> 31)


def _mix64_array(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> np.uint64(30))
    x = x * np.uint64(_M1)
    x = x ^ (x >> np.uint64(27))
    x = x * np.uint64(_M2)
    return x ^ (x >> np.uint64(31))


def split_seed(seed: int, index: int) -> int:
    """Derive an independent 64-bit seed for sub-task ``index``."""
    return mix64(mix64(int(seed) & _MASK) + (int(index) + 1) * _GAMMA)


def _keys(seed: int):
    k1 = mix64(int(seed) & _MASK)
    k2 = mix64(k1 ^ _GAMMA)
    return np.uint64(k1), np.uint64(k2)


def uniform_at(seed: int, stream: int, s1, s2, draw: int = 0) -> np.ndarray:
    """Uniform(0, 1) draws, open interval, one per site ``(s1, s2)``.

    ``stream`` separates independent fields (e.g. an i.i.d. copy used for
    coupling) and ``draw`` separates several variates needed at one site.
    """
    s1 = np.asarray(s1, dtype=np.int64)
    s2 = np.asarray(s2, dtype=np.int64)
    if np.any(np.abs(s1) >= _COORD_OFFSET) or np.any(np.abs(s2) >= _COORD_OFFSET):
        raise ValueError("site coordinate out of addressable range")
    c = (
        ((s1 + _COORD_OFFSET).astype(np.uint64) << np.uint64(40))
        | ((s2 + _COORD_OFFSET).astype(np.uint64) << np.uint64(16))
        | np.uint64((int(stream) & 0xFF) << 8 | (int(draw) & 0xFF))
    )
    k1, k2 = _keys(seed)
    with np.errstate(over="ignore"):
        x = _mix64_array(_mix64_array(c ^ k1) + k2)
    # top 53 bits, shifted off zero
    return ((x >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / (1 << 53))


def normal_at(seed: int, stream: int, s1, s2) -> np.ndarray:
    return special.ndtri(uniform_at(seed, stream, s1, s2))
