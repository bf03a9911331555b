"""Counter-based pseudo-random source for the simulator.

Every draw is a pure function of (seed, stream, counter words), so the
order in which lamps or nodes are sampled cannot perturb results and
runs replay bit-identically on any platform. The mixer is splitmix64;
Python ints keep it exact everywhere.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

STREAM_TRAFFIC = 1
STREAM_FEEDBACK_NOISE = 2
STREAM_AMBIENT = 3
STREAM_AMP_NOISE = 4


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def hash64(seed: int, *words: int) -> int:
    """Mix a seed with counter words into a 64-bit hash."""
    h = seed & _MASK
    for w in words:
        h = _mix((h + _GAMMA + (w & _MASK)) & _MASK)
        h = (h + _GAMMA) & _MASK
    return _mix(h)


def unit(seed: int, *words: int) -> float:
    """Uniform float in [0, 1) keyed by (seed, words)."""
    return hash64(seed, *words) / 2**64


def rand_int(seed: int, lo: int, hi: int, *words: int) -> int:
    """Uniform integer in [lo, hi] keyed by (seed, words)."""
    if hi < lo:
        raise ValueError(f"empty range [{lo}, {hi}]")
    span = hi - lo + 1
    return lo + hash64(seed, *words) % span
