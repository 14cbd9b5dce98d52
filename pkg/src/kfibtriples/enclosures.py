"""Certified real/complex enclosures on top of ``mpmath.iv``.

Real enclosures are ``iv.mpf`` intervals, complex ones are ``iv.mpc`` boxes.
Comparisons on intervals return ``True``/``False`` when decided over the
whole enclosure and ``None`` when the enclosure straddles the threshold;
callers treat ``None`` as "raise precision and retry".
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional, TypeVar

import mpmath
from mpmath import iv, libmp, mp

START_BITS = 128
MAX_BITS = 8192
MID_DIGITS = 30

T = TypeVar("T")


class PrecisionError(ArithmeticError):
    """Raised when a certification cannot be decided at the requested precision."""

    def __init__(self, message: str, bits: Optional[int] = None):
        if bits is not None:
            message = f"{message} (at {bits} bits; retry with --bits {2 * bits})"
        super().__init__(message)
        self.bits = bits


class PrecisionCapError(PrecisionError):
    """The doubling policy hit ``MAX_BITS`` without deciding."""


def escalate(fn: Callable[[int], Optional[T]], bits: int = START_BITS,
             cap: int = MAX_BITS) -> T:
    """Call ``fn(bits)`` with doubling precision until it returns non-None.

    ``fn`` may also raise :class:`PrecisionError` to request more bits.
    """
    while bits <= cap:
        try:
            out = fn(bits)
        except PrecisionCapError:
            raise
        except PrecisionError:
            out = None
        if out is not None:
            return out
        bits *= 2
    raise PrecisionCapError(f"undecided at precision cap of {cap} bits")


@contextmanager
def working_bits(bits: int) -> Iterator[None]:
    """Set both the interval and the plain mpmath precision for a block."""
    saved = iv.prec, mp.prec
    iv.prec = mp.prec = bits
    try:
        yield
    finally:
        iv.prec, mp.prec = saved


def rational(q):
    """Tight interval around an int/Fraction at the current precision."""
    q = Fraction(q)
    return iv.mpf(q.numerator) / q.denominator


def cbox(z):
    """Coerce a real interval / number to a complex box."""
    if isinstance(z, iv.mpc):
        return z
    return iv.mpc(z, 0)


def real_part(z):
    return z.real if isinstance(z, iv.mpc) else z


def contains(enc, value) -> bool:
    """Whether an exact rational ``value`` lies in the enclosure."""
    value = Fraction(value)
    if isinstance(enc, iv.mpc):
        return contains(enc.real, value) and contains(enc.imag, 0)
    return lower(enc) <= value <= upper(enc)


def _raw_to_frac(raw) -> Fraction:
    if raw in (libmp.finf, libmp.fninf, libmp.fnan):
        raise PrecisionError("enclosure is unbounded")
    p, q = libmp.to_rational(raw)
    return Fraction(p, q)


def _exact_mpf(raw) -> mpmath.mpf:
    # mpf(tuple) would round to the ambient precision
    v = mpmath.mpf.__new__(mpmath.mpf)
    v._mpf_ = raw
    return v


def to_fraction(x) -> Fraction:
    """Exact value of a finite ``mpf``."""
    return _raw_to_frac(x._mpf_)


def endpoints(enc) -> tuple[mpmath.mpf, mpmath.mpf]:
    """Endpoints of a real interval as unrounded ``mpf`` values."""
    lo, hi = enc._mpi_
    return _exact_mpf(lo), _exact_mpf(hi)


def lower(enc) -> Fraction:
    """Exact lower endpoint of a real interval."""
    return _raw_to_frac(enc._mpi_[0])


def upper(enc) -> Fraction:
    """Exact upper endpoint of a real interval."""
    return _raw_to_frac(enc._mpi_[1])


def less(enc, value) -> Optional[bool]:
    """Certified ``enc < value`` for exact rational ``value``."""
    value = Fraction(value)
    if upper(enc) < value:
        return True
    if lower(enc) >= value:
        return False
    return None


def greater(enc, value) -> Optional[bool]:
    """Certified ``enc > value`` for exact rational ``value``."""
    value = Fraction(value)
    if lower(enc) > value:
        return True
    if upper(enc) <= value:
        return False
    return None


def strictly_inside(enc, lo, hi) -> Optional[bool]:
    a, b = greater(enc, lo), less(enc, hi)
    if a is False or b is False:
        return False
    if a is None or b is None:
        return None
    return True


def modulus(z):
    """Real interval containing ``|z|``."""
    return abs(z)


@dataclass(frozen=True)
class Disk:
    """Closed complex disk: an exact binary center and an upper radius bound."""

    center: mpmath.mpc
    radius: mpmath.mpf

    def box(self):
        r = iv.mpf([-self.radius, self.radius])
        return iv.mpc(iv.mpf(self.center.real) + r, iv.mpf(self.center.imag) + r)

    def modulus(self):
        c = abs(iv.mpc(self.center.real, self.center.imag))
        return c + iv.mpf([-self.radius, self.radius])


def mid_string(enc, digits: int = MID_DIGITS) -> str:
    lo, hi = endpoints(enc)
    with mp.workprec(max(4 * digits, _bits(lo), _bits(hi)) + 8):
        return mpmath.nstr((lo + hi) / 2, digits, strip_zeros=False)


def radius_string(enc) -> str:
    """Upper bound on the half-width, as a short decimal."""
    lo, hi = endpoints(enc)
    with mp.workprec(max(_bits(lo), _bits(hi)) + 8):
        r = (hi - lo) / 2
    with mp.workprec(64):
        return mpmath.nstr(r * (1 + mpmath.mpf(2) ** -20), 6)


def _bits(x) -> int:
    return max(int(x._mpf_[3]), 53) if x._mpf_[1] else 53


def real_json(enc) -> dict:
    return {"mid": mid_string(enc), "radius": radius_string(enc)}


def complex_json(enc) -> dict:
    return {"re": real_json(enc.real), "im": real_json(enc.imag)}
