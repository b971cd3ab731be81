"""Portable sub-seed derivation.

``derive_seed(master, tag, index)`` is defined bit-exactly so that any
implementation can reproduce the seed streams:

    h = fnv1a64(tag.encode("utf-8"))
    s = splitmix64(master ^ h)
    s = splitmix64(s ^ index)

with all arithmetic modulo 2**64 and ``splitmix64`` the standard finaliser::

    z = (x + 0x9E3779B97F4A7C15)
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)
"""

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & MASK64
    return h


def derive_seed(master: int, tag: str, index: int = 0) -> int:
    s = splitmix64((master & MASK64) ^ fnv1a64(tag.encode("utf-8")))
    return splitmix64(s ^ (index & MASK64))
