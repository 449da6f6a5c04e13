"""Counter-based random numbers.

Every draw is a pure function of ``(master_seed, replicate, orbit_id, slot)``
so matrices can be regenerated in any order and on any number of workers.
The mixing function is the SplitMix64 finaliser.
"""
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_53 = 2.0 ** -53


def mix64(x):
    """SplitMix64 finaliser applied elementwise to a uint64 array."""
    z = np.array(x, dtype=np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(master_seed: int, replicate: int) -> np.uint64:
    """Key of the stream owned by one replicate."""
    s = mix64(np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF))
    r = mix64(np.uint64(replicate & 0xFFFFFFFFFFFFFFFF) ^ np.uint64(0xD1B54A32D192ED03))
    return mix64(s ^ r)[()]


def random_bits(key, counters):
    """64 random bits per counter for stream `key`."""
    c = mix64(np.asarray(counters, dtype=np.uint64))
    return mix64(c ^ np.uint64(key))


def uniforms(key, counters, open_zero=False):
    """Doubles on ``[0, 1)``, or on ``(0, 1]`` when `open_zero` is set."""
    top = (random_bits(key, counters) >> np.uint64(11)).astype(np.float64)
    if open_zero:
        top += 1.0
    return top * _TWO_53


def normal_pairs(master_seed: int, replicate: int, ids):
    """Two independent standard normals per id via Box-Muller.

    Id ``k`` consumes counters ``2k`` and ``2k + 1``.
    """
    key = stream_key(master_seed, replicate)
    ids = np.asarray(ids, dtype=np.uint64)
    u1 = uniforms(key, ids * np.uint64(2), open_zero=True)
    u2 = uniforms(key, ids * np.uint64(2) + np.uint64(1))
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    return r * np.cos(theta), r * np.sin(theta)
