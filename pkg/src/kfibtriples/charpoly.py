"""Roots, Binet coefficients and norms for X^k - X^(k-1) - ... - X - 1.

Root certification:

* the dominant root is isolated by exact bisection on dyadic rationals,
  using the sign of X^(k+1) - 2X^k + 1 (which has the sign of the
  polynomial for X > 1);
* all roots are approximated with ``mpmath.polyroots`` and certified with
  Gerschgorin disks of the Weierstrass matrix ``diag(z) - W 1^T`` whose
  characteristic polynomial is the polynomial itself; pairwise disjoint
  disks hold exactly one root each.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import mpmath
from mpmath import iv, mp

from .enclosures import (
    START_BITS,
    Disk,
    PrecisionError,
    cbox,
    contains,
    endpoints,
    escalate,
    greater,
    less,
    to_fraction,
    working_bits,
)

Number = Union[int, Fraction]


def _check_k(k: int) -> None:
    if not isinstance(k, int) or isinstance(k, bool) or k < 2:
        raise ValueError(f"order k must be an integer >= 2, got {k!r}")


@dataclass(frozen=True)
class CharPoly:
    k: int

    def __post_init__(self):
        _check_k(self.k)

    @property
    def coefficients(self) -> list[int]:
        """Leading coefficient first."""
        return [1] + [-1] * self.k

    @property
    def rational_numerator(self) -> list[int]:
        """Coefficients of X^(k+1) - 2X^k + 1, leading first."""
        return [1, -2] + [0] * (self.k - 1) + [1]




def _horner(coeffs, x):
    acc = 0 * x
    for c in coeffs:
        acc = acc * x + c
    return acc


def _excludes_one(x) -> bool:
    if isinstance(x, iv.mpc):
        return bool(_excludes_zero(x - 1))
    if isinstance(x, iv.mpf):
        return 1 not in x
    return x != 1


def _excludes_zero(z) -> bool:
    if isinstance(z, iv.mpc):
        return 0 not in z.real or 0 not in z.imag
    return 0 not in z


def psi_eval(k: int, x, form: Optional[str] = None):
    """Evaluate the characteristic polynomial at ``x``.

    ``x`` may be an int/Fraction (exact result), an ``iv.mpf`` or ``iv.mpc``.
    Away from 1 the rational form (x^(k+1) - 2x^k + 1)/(x - 1) is used,
    otherwise the monomial sum.  ``form`` forces ``"rational"`` or
    ``"monomial"``.
    """
    _check_k(k)
    poly = CharPoly(k)
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        x = Fraction(x)
    if form is None:
        form = "rational" if _excludes_one(x) else "monomial"
    if form == "monomial":
        return _horner(poly.coefficients, x)
    if form != "rational":
        raise ValueError(f"unknown form {form!r}")
    if not _excludes_one(x):
        raise PrecisionError("argument enclosure straddles 1 in the rational form")
    num = x ** (k + 1) - 2 * x ** k + 1
    return num / (x - 1)


# ---------------------------------------------------------------------------
# dominant root
# ---------------------------------------------------------------------------

def _dominant_dyadic(k: int, bits: int) -> tuple[int, int]:
    """Integers lo < hi with the root in (lo/2^bits, hi/2^bits), hi - lo = 1."""
    scale = 1 << bits
    lo, hi = 3 * scale // 2, 2 * scale
    # g(m / 2^B) * 2^(B(k+1)) = m^(k+1) - 2^(B+1) m^k + 2^(B(k+1))
    top = 1 << (bits * (k + 1))

    def sign(m: int) -> int:
        v = m ** k * (m - 2 * scale) + top
        return (v > 0) - (v < 0)

    if not (sign(lo) < 0 < sign(hi)):
        raise AssertionError("dominant root not bracketed by (3/2, 2)")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        s = sign(mid)
        if s == 0:
            return mid, mid
        if s < 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


@functools.lru_cache(maxsize=None)
def dominant_root(k: int, bits: int = START_BITS):
    """Certified real interval around the dominant root, width 2^-bits."""
    _check_k(k)
    lo, hi = _dominant_dyadic(k, bits)
    with working_bits(bits + 8):
        return iv.mpf([mpmath.ldexp(lo, -bits), mpmath.ldexp(hi, -bits)])


# ---------------------------------------------------------------------------
# all roots
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RootSet:
    """Certified enclosures of all k roots; ``others`` sorted by argument."""

    k: int
    dominant: object  # iv.mpf
    others: tuple[Disk, ...]
    working_precision: int

    @property
    def dominant_box(self):
        return cbox(self.dominant)

    def boxes(self) -> list:
        """Complex boxes, dominant first."""
        with working_bits(self.working_precision):
            return [self.dominant_box] + [d.box() for d in self.others]

    def moduli(self) -> list:
        with working_bits(self.working_precision):
            return [abs(self.dominant)] + [d.modulus() for d in self.others]

    def product(self):
        with working_bits(self.working_precision):
            acc = iv.mpc(1, 0)
            for b in self.boxes():
                acc = acc * b
            return acc


class InsufficientPrecision(PrecisionError):
    pass


def _certify_roots(k: int, bits: int) -> RootSet:
    coeffs = CharPoly(k).coefficients
    with working_bits(bits + 16):
        try:
            approx = mpmath.polyroots(coeffs, maxsteps=50 + 10 * k,
                                      extraprec=bits)
        except mpmath.libmp.NoConvergence as exc:
            raise InsufficientPrecision("root iteration did not converge", bits) from exc
    with working_bits(bits):
        pts = [iv.mpc(z.real, z.imag) for z in approx]
        centers, radii = [], []
        for i, zi in enumerate(pts):
            denom = iv.mpc(1, 0)
            for j, zj in enumerate(pts):
                if j != i:
                    denom = denom * (zi - zj)
            if not _excludes_zero(denom):
                raise InsufficientPrecision("root approximations not separated", bits)
            w = _horner(coeffs, zi) / denom
            c = zi - w
            center = mpmath.mpc(endpoints(c.real.mid)[0], endpoints(c.imag.mid)[0])
            # Gerschgorin row radius (k-1)|W_i| plus the distance to the stored center
            rad = (k - 1) * abs(w) + abs(c - iv.mpc(center.real, center.imag))
            centers.append(center)
            radii.append(endpoints(rad)[1])
        for i in range(k):
            for j in range(i + 1, k):
                gap = abs(iv.mpc(centers[i].real, centers[i].imag)
                          - iv.mpc(centers[j].real, centers[j].imag))
                if not greater(gap, to_fraction(radii[i]) + to_fraction(radii[j])):
                    raise InsufficientPrecision("root disks overlap", bits)
        disks = [Disk(c, r) for c, r in zip(centers, radii)]
        outside = [d for d in disks if greater(d.modulus(), 1)]
        inside = [d for d in disks if less(d.modulus(), 1)]
        if len(outside) != 1 or len(inside) != k - 1:
            raise InsufficientPrecision("root moduli not separated from 1", bits)
        dom = dominant_root(k, bits)
        # the bisection interval must sit inside the unique outer disk
        if not contains(outside[0].box(), to_fraction(endpoints(dom.mid)[0])):
            raise InsufficientPrecision("dominant root inconsistent", bits)
        inside.sort(key=lambda d: (-d.center.real, -d.center.imag))
        rs = RootSet(k, dom, tuple(inside), bits)
        if not contains(rs.product(), (-1) ** (k - 1)):
            raise InsufficientPrecision("root product check failed", bits)
        return rs


@functools.lru_cache(maxsize=None)
def all_roots(k: int, precision: int = START_BITS) -> RootSet:
    """Certified enclosures of all roots at ``precision`` bits.

    Raises :class:`InsufficientPrecision` if certification fails at this
    precision; :func:`certified_roots` applies the doubling policy.
    """
    _check_k(k)
    if precision < 64:
        raise ValueError("precision must be at least 64 bits")
    return _certify_roots(k, precision)


def certified_roots(k: int, bits: int = START_BITS) -> RootSet:
    return escalate(lambda b: all_roots(k, b), bits)


# ---------------------------------------------------------------------------
# Binet coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BinetCoefficients:
    values: tuple  # iv.mpc boxes, f_1 first
    f1_real: object  # iv.mpf
    working_precision: int


def binet_coefficient(k: int, alpha):
    """(alpha - 1) alpha^-1 / (2 + (k+1)(alpha - 2)) on an enclosure."""
    den = 2 + (k + 1) * (alpha - 2)
    if not _excludes_zero(den):
        raise PrecisionError("Binet denominator enclosure contains zero")
    return (alpha - 1) / alpha / den


@functools.lru_cache(maxsize=None)
def binet_coefficients(roots: RootSet) -> BinetCoefficients:
    k = roots.k
    with working_bits(roots.working_precision):
        f1 = binet_coefficient(k, roots.dominant)
        values = [cbox(f1)] + [binet_coefficient(k, b) for b in roots.boxes()[1:]]
    return BinetCoefficients(tuple(values), f1, roots.working_precision)


def binet_eval(coeffs: BinetCoefficients, roots: RootSet, n: int):
    """Real enclosure of sum f_i alpha_i^n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    with working_bits(roots.working_precision):
        acc = coeffs.f1_real * roots.dominant ** n
        for f, a in zip(coeffs.values[1:], roots.boxes()[1:]):
            acc = acc + (f * a ** n).real
        return acc


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def norm_linear_form(k: int, p: Number, q: Number) -> Fraction:
    """Exact |prod_i (p alpha_i - q)| = |p|^k |Psi_k(q/p)|."""
    _check_k(k)
    p, q = Fraction(p), Fraction(q)
    if p == 0:
        raise ValueError("p must be non-zero")
    return abs(p) ** k * abs(psi_eval(k, q / p))


def norm_linear_form_numeric(roots: RootSet, p: Number, q: Number):
    """Enclosure of |prod_i (p alpha_i - q)| from the root enclosures."""
    with working_bits(roots.working_precision):
        pp, qq = iv.mpf(Fraction(p).numerator) / Fraction(p).denominator, \
            iv.mpf(Fraction(q).numerator) / Fraction(q).denominator
        acc = iv.mpc(1, 0)
        for b in roots.boxes():
            acc = acc * (pp * b - qq)
        return abs(acc)
