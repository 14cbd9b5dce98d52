"""Certified checks of the root window, Binet residuals, size bounds and the gcd bound.

Every check compares an exact integer with a certified interval and only
passes when the whole interval is on the correct side.  Undecided
comparisons are retried at doubled precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from mpmath import iv

from .charpoly import binet_coefficient, dominant_root
from .enclosures import (
    START_BITS,
    escalate,
    greater,
    less,
    real_json,
    strictly_inside,
    working_bits,
)
from .sequence import cache_for

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class BinetResidualRecord:
    k: int
    n: int
    residual: object  # iv.mpf enclosure of F_n - f_1 alpha_1^n
    ok: bool

    def to_json(self) -> dict:
        return {"check": "binet-residual", "k": self.k, "n": self.n,
                "residual": real_json(self.residual), "ok": self.ok}


@dataclass(frozen=True)
class SizeBoundRecord:
    k: int
    n: int
    lower_ok: bool  # alpha^(n-2) < F_n
    upper_ok: bool  # F_n < alpha^(n-1)

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok

    def to_json(self) -> dict:
        return {"check": "size-bounds", "k": self.k, "n": self.n,
                "lower_ok": self.lower_ok, "upper_ok": self.upper_ok, "ok": self.ok}


@dataclass(frozen=True)
class GcdScanRecord:
    k: int
    x: int
    y: int
    gcd_value: int
    bound: object  # iv.mpf enclosure of alpha_1^(kx/(k+1))
    ok: bool

    def to_json(self) -> dict:
        return {"check": "gcd-bound", "k": self.k, "x": self.x, "y": self.y,
                "gcd": str(self.gcd_value), "bound": real_json(self.bound),
                "ok": self.ok}


def verify_root_window(k: int, bits: int = START_BITS) -> bool:
    """True iff the dominant root enclosure lies strictly inside (2 - 1/k, 2)."""
    lo = 2 - Fraction(1, k)
    return escalate(lambda b: strictly_inside(dominant_root(k, b), lo, 2), bits)


def size_bound_records(k: int, n_max: int, bits: int = START_BITS) -> list[SizeBoundRecord]:
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    cache = cache_for(k)
    cache.extend_to(n_max)

    def attempt(b: int) -> Optional[list[SizeBoundRecord]]:
        alpha = dominant_root(k, b)
        out = []
        with working_bits(b):
            power = iv.mpf(1)  # alpha^(n-2)
            for n in range(2, n_max + 1):
                f = cache[n]
                lower_ok = less(power, f)
                upper = power * alpha
                upper_ok = greater(upper, f)
                if lower_ok is None or upper_ok is None:
                    return None
                out.append(SizeBoundRecord(k, n, lower_ok, upper_ok))
                power = upper
        return out

    return escalate(attempt, max(bits, _bits_for_growth(n_max)))


def verify_size_bounds(k: int, n_max: int, bits: int = START_BITS) -> list[bool]:
    """Both strict size inequalities for n = 2..n_max (index 0 is n = 2)."""
    return [r.ok for r in size_bound_records(k, n_max, bits)]


def _bits_for_growth(n: int) -> int:
    # alpha^n < 2^n: keep roughly n + 64 bits so the integer part is resolved
    b = START_BITS
    while b < n + 64:
        b *= 2
    return b


def _residual(k: int, n: int, b: int):
    alpha = dominant_root(k, b)
    with working_bits(b):
        f1 = binet_coefficient(k, alpha)
        return cache_for(k)[n] - f1 * alpha ** n


def verify_binet_residuals(k: int, n_max: int, n_min: int = 1,
                           bits: int = START_BITS) -> list[BinetResidualRecord]:
    """Residual records F_n - f_1 alpha_1^n for n = n_min..n_max."""
    if n_max < max(n_min, 0) or n_min < 0:
        raise ValueError("need 0 <= n_min <= n_max")
    cache_for(k).extend_to(n_max)

    def attempt(b: int) -> Optional[list[BinetResidualRecord]]:
        out = []
        for n in range(n_min, n_max + 1):
            res = _residual(k, n, b)
            ok = strictly_inside(res, -HALF, HALF)
            if ok is None:
                return None
            out.append(BinetResidualRecord(k, n, res, ok))
        return out

    return escalate(attempt, max(bits, _bits_for_growth(n_max)))


def _gcd_bound(k: int, x: int, b: int):
    alpha = dominant_root(k, b)
    with working_bits(b):
        return iv.exp(iv.log(alpha) * (iv.mpf(k * x) / (k + 1)))


def gcd_scan(k: int, x_max: int, bits: int = START_BITS) -> list[GcdScanRecord]:
    """gcd(F_x - 1, F_y - 1) against alpha_1^(kx/(k+1)) for 3 <= y < x <= x_max.

    Failures are reported as records with ``ok=False``, never raised.
    """
    if x_max < 4:
        raise ValueError("x_max must be >= 4")
    cache = cache_for(k)
    cache.extend_to(x_max)
    b0 = max(bits, _bits_for_growth(x_max))
    records = []
    for x in range(4, x_max + 1):
        fx = cache[x] - 1
        bound_holder: dict[str, object] = {}

        def attempt(b: int, x=x, fx=fx, holder=bound_holder):
            bound = _gcd_bound(k, x, b)
            row = []
            for y in range(3, x):
                d = math.gcd(fx, cache[y] - 1)
                ok = greater(bound, d)
                if ok is None:
                    return None
                row.append((y, d, ok))
            holder["bound"] = bound
            return row

        for y, d, ok in escalate(attempt, b0):
            records.append(GcdScanRecord(k, x, y, d, bound_holder["bound"], ok))
    return records
