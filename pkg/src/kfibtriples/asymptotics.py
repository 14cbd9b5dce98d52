"""Truncated expansion of c = sqrt((F_y - 1)(F_z - 1)/(F_x - 1)).

Writing F_n - 1 = f_1 alpha_1^n (1 + u_n) with

    u_n = (-1/f_1) alpha_1^-n + sum_{i>=2} (f_i/f_1) alpha_i^n alpha_1^-n,

c = sqrt(f_1) alpha_1^((-x+y+z)/2) (1+u_x)^(-1/2) (1+u_y)^(1/2) (1+u_z)^(1/2).
Each factor is expanded binomially, each power of u multinomially, and the
product is truncated at total order T.  A term is a coefficient times the
monomial prod_i alpha_i^(L_i . (x, y, z)).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from mpmath import iv

from .charpoly import BinetCoefficients, RootSet
from .enclosures import PrecisionError, greater, less, working_bits
from .sequence import cache_for

MAX_T = 6
DEFAULT_TERM_CAP = 250_000
FACTOR_POWERS = (Fraction(-1, 2), Fraction(1, 2), Fraction(1, 2))  # x, y, z


class ExpansionOverflow(ValueError):
    """Too many terms; reduce T."""


@dataclass(frozen=True)
class ExpansionConfig:
    T: int
    epsilon: int
    kappa: float = math.log(1.5)

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("T must be >= 0")
        if self.epsilon not in (0, 1):
            raise ValueError("epsilon must be 0 or 1")

    @classmethod
    def for_point(cls, T: int, x: int, y: int, z: int) -> "ExpansionConfig":
        return cls(T, (-x + y + z) % 2)


@dataclass(frozen=True)
class ExpansionTerm:
    coefficient: object  # iv.mpc
    exponents: tuple[tuple[int, int, int], ...]  # one (x, y, z) form per root

    @property
    def is_constant(self) -> bool:
        return not any(any(f) for f in self.exponents)

    def signs_ok(self) -> bool:
        first, rest = self.exponents[0], self.exponents[1:]
        return all(c <= 0 for c in first) and all(c >= 0 for f in rest for c in f)


def gen_binomial(p: Fraction, j: int) -> Fraction:
    """binom(p, j) for rational p."""
    out = Fraction(1)
    for i in range(j):
        out *= (p - i) / (i + 1)
    return out


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` non-negative ints summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _multinomial(beta: Sequence[int]) -> int:
    out, acc = 1, 0
    for b in beta:
        acc += b
        out *= math.comb(acc, b)
    return out


def term_count(k: int, T: int) -> int:
    """Number of terms before collection."""
    total = 0
    for jx, jy, jz in itertools.product(range(T + 1), repeat=3):
        if jx + jy + jz <= T:
            total += (math.comb(jx + k - 1, k - 1) * math.comb(jy + k - 1, k - 1)
                      * math.comb(jz + k - 1, k - 1))
    return total


def expand_c(k: int, config: ExpansionConfig, roots: RootSet, coeffs: BinetCoefficients,
             term_cap: int = DEFAULT_TERM_CAP) -> list[ExpansionTerm]:
    """Terms of the order-T expansion, constant term first."""
    if config.T > MAX_T:
        raise ValueError(f"T must be <= {MAX_T}")
    if roots.k != k:
        raise ValueError("roots are for a different k")
    n_raw = term_count(k, config.T)
    if n_raw > term_cap:
        raise ExpansionOverflow(f"{n_raw} terms exceed cap {term_cap}; reduce T")
    with working_bits(roots.working_precision):
        f1 = coeffs.values[0]
        # summand coefficients of u_n: -1/f_1, then f_i/f_1
        base = [-1 / f1] + [f / f1 for f in coeffs.values[1:]]
        # per-factor tables: j -> list of (coefficient, beta)
        factor_terms = []
        for p in FACTOR_POWERS:
            table = {}
            for j in range(config.T + 1):
                bc = gen_binomial(p, j)
                rows = []
                for beta in _compositions(j, k):
                    c = iv.mpf(bc.numerator) / bc.denominator * _multinomial(beta)
                    for b_i, t in zip(beta, base):
                        if b_i:
                            c = c * t ** b_i
                    rows.append((c, beta))
                table[j] = rows
            factor_terms.append(table)

        collected: dict[tuple, object] = {}
        order: list[tuple] = []
        for jx, jy, jz in itertools.product(range(config.T + 1), repeat=3):
            if jx + jy + jz > config.T:
                continue
            for (cx, bx), (cy, by), (cz, bz) in itertools.product(
                    factor_terms[0][jx], factor_terms[1][jy], factor_terms[2][jz]):
                forms = [(-jx, -jy, -jz)]
                forms += [(bx[i], by[i], bz[i]) for i in range(1, k)]
                key = tuple(forms)
                coef = cx * cy * cz
                if key in collected:
                    collected[key] = collected[key] + coef
                else:
                    collected[key] = coef
                    order.append(key)

    terms = []
    for key in order:
        coef = collected[key]
        if not isinstance(coef, iv.mpc):
            coef = iv.mpc(coef, 0)
        if coef.real == 0 and coef.imag == 0:
            continue  # exact cancellation
        if 0 in coef.real and 0 in coef.imag:
            raise PrecisionError("expansion coefficient enclosure contains 0",
                                 roots.working_precision)
        terms.append(ExpansionTerm(coef, key))
    return terms


def _monomial(term: ExpansionTerm, roots: RootSet, x: int, y: int, z: int):
    out = iv.mpc(1, 0)
    for form, alpha in zip(term.exponents, roots.boxes()):
        e = form[0] * x + form[1] * y + form[2] * z
        if e:
            out = out * alpha ** e
    return out


def eval_expansion(terms: Sequence[ExpansionTerm], config: ExpansionConfig,
                   x: int, y: int, z: int, roots: RootSet, coeffs: BinetCoefficients):
    """sqrt(f_1 alpha_1^eps) alpha_1^((-x+y+z-eps)/2) (sum of terms), real enclosure."""
    if (-x + y + z - config.epsilon) % 2:
        raise ValueError("(-x + y + z - epsilon) must be even")
    if not (x <= y <= z):
        raise ValueError("need x <= y <= z")
    with working_bits(roots.working_precision):
        alpha = roots.dominant
        total = iv.mpc(0, 0)
        for t in terms:
            total = total + t.coefficient * _monomial(t, roots, x, y, z)
        pre = iv.sqrt(coeffs.f1_real * alpha ** config.epsilon) \
            * alpha ** ((-x + y + z - config.epsilon) // 2)
        return pre * total.real


def exact_c(k: int, x: int, y: int, z: int, bits: int):
    """Enclosure of sqrt((F_y - 1)(F_z - 1)/(F_x - 1))."""
    cache = cache_for(k)
    with working_bits(bits):
        return iv.sqrt(iv.mpf((cache[y] - 1) * (cache[z] - 1)) / (cache[x] - 1))


def monomial_decay_check(terms: Sequence[ExpansionTerm], x: int, y: int, z: int,
                         roots: RootSet) -> list[bool]:
    """|M_j(x, y, z)| <= (3/2)^-x for every non-constant term."""
    if x < 1:
        raise ValueError("x must be >= 1")
    nonconst = [t for t in terms if not t.is_constant]
    if not nonconst:
        raise ValueError("no non-constant terms")
    out = []
    with working_bits(roots.working_precision):
        logs = [iv.log(m) for m in roots.moduli()]
        limit = -x * iv.log(iv.mpf(3) / 2)
        for t in nonconst:
            e = iv.mpf(0)
            for form, lg in zip(t.exponents, logs):
                coef = form[0] * x + form[1] * y + form[2] * z
                if coef:
                    e = e + coef * lg
            ok = less(e - limit, 0)
            if ok is None:
                # equality cannot be certified strictly; accept only when decided
                ok = False if greater(e - limit, 0) else None
            if ok is None:
                raise PrecisionError("monomial bound undecided", roots.working_precision)
            out.append(ok)
    return out
