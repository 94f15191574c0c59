"""Deterministic, task-keyed randomness.

All sampling randomness derives from a master seed through keyed hashing of
structured task ids, so any execution order (or worker count) produces
identical results. Variates are consumed as 64-bit uniforms; when a
comparison against a threshold is not settled by the first 64 bits, a second
id-derived block extends the comparison to 128 bits exactly.
"""

from __future__ import annotations

import hashlib
from bisect import bisect_right
from fractions import Fraction

import numpy as np

_MASK = (1 << 64) - 1


def _encode(parts: tuple) -> bytes:
    # repr of a tuple of ints/strings/None/nested tuples is stable across runs
    # and injective for those types (quotes and parens disambiguate)
    return repr(parts).encode()


class Stream:
    """Sequential 64-bit uniform variates from one task-id-derived seed.

    splitmix64: negligible setup cost, full 2^64 period per stream; stream
    independence comes from the keyed-hash seed derivation.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def u64(self) -> int:
        self._state = s = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = ((s ^ (s >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return self.u64() / 2.0**64


class RandomnessPlan:
    """Pure function from structured task ids to independent variate streams."""

    __slots__ = ("seed", "_base8", "_base16")

    def __init__(self, seed: int):
        self.seed = int(seed) & (2**64 - 1)
        key = self.seed.to_bytes(8, "little")
        self._base8 = hashlib.blake2b(digest_size=8, key=key)
        self._base16 = hashlib.blake2b(digest_size=16, key=key)

    def _digest(self, parts: tuple, nbytes: int) -> bytes:
        h = (self._base8 if nbytes == 8 else self._base16).copy()
        h.update(_encode(parts))
        return h.digest()

    def stream(self, *parts) -> Stream:
        return Stream(int.from_bytes(self._digest(parts, 8), "little"))

    def u64(self, *parts) -> int:
        """One 64-bit value keyed directly by the task id (no stream state)."""
        return int.from_bytes(self._digest(parts, 8), "little")

    def randint(self, bound: int, *parts) -> int:
        """Uniform int in [0, bound) keyed by the task id (128-bit reduction)."""
        x = int.from_bytes(self._digest(parts, 16), "little")
        return x % bound

    def subplan(self, *parts) -> "RandomnessPlan":
        return RandomnessPlan(int.from_bytes(self._digest(parts, 8), "little"))


def less_than(u: int, threshold: Fraction, extension) -> bool:
    """Decide ``U < threshold`` for the real U whose first 64 bits are ``u``.

    ``threshold`` is an exact rational in [0, 1]. When the first 64 bits are
    inconclusive (u equals the threshold's 64-bit floor and the threshold is
    not dyadic at that precision), ``extension()`` supplies the next 64 bits;
    a still-exact tie resolves to False, bounding error below 2**-128.
    """
    scaled = threshold * 2**64
    floor64 = scaled.numerator // scaled.denominator
    if u < floor64:
        return True
    if u > floor64 or scaled.denominator == 1:
        return False
    u128 = (u << 64) | extension()
    scaled128 = threshold * 2**128
    return u128 * scaled128.denominator < scaled128.numerator


class TieUnresolved(Exception):
    """A threshold fell inside the drawn 64-bit window; extension bits needed."""


class CategoricalSampler:
    """Exact categorical draws over float probabilities via integer thresholds.

    Probabilities are renormalized as exact rationals of their float values;
    selection needs one 64-bit variate almost surely and never more than two.
    """

    __slots__ = ("values", "_cuts", "_cum_exact", "_k")

    def __init__(self, values, probs):
        if len(values) == 0:
            raise ValueError("empty support")
        total = sum((Fraction(float(p)) for p in probs), Fraction(0))
        if total <= 0:
            raise ValueError("probabilities must have positive total")
        acc = Fraction(0)
        cuts = []
        cum = []
        for p in probs:
            acc += Fraction(float(p)) / total
            cum.append(acc)
            scaled = acc * 2**64
            cuts.append(scaled.numerator // scaled.denominator)
        self.values = list(values)
        self._cuts = cuts
        self._cum_exact = cum
        self._k = len(cuts)

    def draw_at(self, u: int, extension=None):
        """Select given the primary 64-bit block ``u``. Extension blocks are
        needed only when a threshold lands inside u's dyadic window (about one
        draw in 2^64): with ``extension=None`` that raises TieUnresolved so the
        caller can retry with an id-keyed extension generator."""
        i = bisect_right(self._cuts, u)
        start = i - 1
        while start > 0 and self._cuts[start - 1] == u:
            start -= 1
        for idx in range(max(start, 0), i):
            if self._cuts[idx] == u:
                if extension is None:
                    raise TieUnresolved(idx)
                if less_than(u, self._cum_exact[idx], extension):
                    return self.values[idx]
        if i >= self._k:
            i = self._k - 1
        return self.values[i]

    def draw(self, stream: Stream):
        return self.draw_at(stream.u64(), stream.u64)


def reseed_numpy(plan: RandomnessPlan, *parts) -> np.random.Generator:
    """Seeded numpy generator for bulk diagnostics (Monte Carlo helpers)."""
    return np.random.default_rng(plan.u64(*parts))
