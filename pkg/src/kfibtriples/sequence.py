"""Exact k-generalized Fibonacci numbers.

Indexing: ``F_n = 0`` for ``n = -(k-2), ..., 0``, ``F_1 = 1`` and
``F_{n+k} = F_{n+k-1} + ... + F_n``.  For ``k = 2`` this is the classical
Fibonacci sequence, for ``k = 3`` Tribonacci (0, 0, 1, 1, 2, 4, 7, ...).
"""
from __future__ import annotations

import bisect
import math
from typing import Optional


def _check_k(k: int) -> None:
    if not isinstance(k, int) or k < 2:
        raise ValueError(f"order k must be an integer >= 2, got {k!r}")


class SequenceCache:
    """Append-only table of ``F_n^{(k)}`` for ``n >= -(k-2)``.

    Extension is single-writer; a fully materialized cache is safe to read
    concurrently.
    """

    def __init__(self, k: int):
        _check_k(k)
        self.k = k
        self.offset = k - 2  # terms[n + offset] == F_n
        self.terms: list[int] = [0] * (k - 1) + [1]
        # running window sum of the last k terms
        self._window = 1

    @property
    def high_water(self) -> int:
        return len(self.terms) - 1 - self.offset

    def extend_to(self, n: int) -> None:
        if n <= self.high_water:
            return
        target = max(n, 2 * self.high_water)
        terms, k = self.terms, self.k
        window = self._window
        while len(terms) - 1 - self.offset < target:
            nxt = window
            window += nxt - (terms[-k] if len(terms) >= k else 0)
            terms.append(nxt)
        self._window = window

    def __getitem__(self, n: int) -> int:
        if n < -self.offset:
            raise IndexError(f"index {n} below -(k-2) = {-self.offset}")
        self.extend_to(n)
        return self.terms[n + self.offset]

    def range(self, start: int, stop: int) -> list[int]:
        """``[F_start, ..., F_{stop-1}]``."""
        self.extend_to(stop)
        return self.terms[start + self.offset:stop + self.offset]


_CACHES: dict[int, SequenceCache] = {}


def cache_for(k: int) -> SequenceCache:
    _check_k(k)
    cache = _CACHES.get(k)
    if cache is None:
        cache = _CACHES[k] = SequenceCache(k)
    return cache


def kfib(k: int, n: int) -> int:
    """Return ``F_n^{(k)}``.

    >>> kfib(2, 7), kfib(3, 8), kfib(4, 1)
    (13, 44, 1)
    """
    _check_k(k)
    if n < -(k - 2):
        raise ValueError(f"index n must be >= -(k-2) = {-(k - 2)}, got {n}")
    return cache_for(k)[n]


def dominant_root_float(k: int) -> float:
    """Double-precision dominant root of X^k - X^(k-1) - ... - 1 (bisection)."""
    _check_k(k)
    lo, hi = 1.5, 2.0
    # sign of X^(k+1) - 2X^k + 1 equals the sign of the polynomial on (1, 2]
    for _ in range(200):
        mid = (lo + hi) / 2
        if mid == lo or mid == hi:
            break
        if mid ** k * (mid - 2) + 1 < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def membership(k: int, v: int) -> Optional[int]:
    """Smallest ``n >= 1`` with ``F_n^{(k)} == v``, or ``None``.

    The index is bracketed with alpha^(n-2) < F_n < alpha^(n-1) and then
    located by exact comparison.
    """
    _check_k(k)
    if v < 1:
        raise ValueError(f"value must be >= 1, got {v}")
    cache = cache_for(k)
    if v <= 2:
        return 1 if v == 1 else 3
    # from the size bounds: log_alpha(v) + 1 < n < log_alpha(v) + 2 (n >= 3)
    t = math.log(v) / math.log(dominant_root_float(k))
    lo = max(1, int(math.floor(t)) - 1)
    hi = int(math.ceil(t)) + 4
    cache.extend_to(hi)
    base = cache.offset
    i = bisect.bisect_left(cache.terms, v, lo + base, hi + base + 1)
    if i > hi + base or cache.terms[i] != v:
        if cache.terms[lo + base] > v or cache.terms[hi + base] < v:
            # bracket missed (float trouble); fall back to a full search
            i = bisect.bisect_left(cache.terms, v, 1 + base)
            if i < len(cache.terms) and cache.terms[i] == v:
                return i - base
        return None
    return i - base
