"""Multiplicative independence of the roots.

The conjugate-log matrix has rows summing to zero and a constant positive
diagonal log(alpha_1); every off-diagonal entry is the log-modulus of some
non-dominant root.  Strict diagonal dominance of the transpose therefore
reduces to: every non-dominant root has modulus strictly below 1.  The
margin of row i is the omitted entry -log|alpha|, so the certificate
records the smallest such value.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath
import numpy as np
from mpmath import iv, mp

from .charpoly import RootSet, certified_roots
from .enclosures import PrecisionError, contains, greater, real_json, working_bits


@dataclass(frozen=True)
class IndependenceCertificate:
    k: int
    log_alpha1: object
    nondominant_log_moduli: tuple  # -log|alpha_i| for i >= 2
    dominance_margin: object
    subset: tuple[int, ...]
    working_precision: int
    passed: bool = True

    def to_json(self) -> dict:
        return {
            "check": "independence",
            "k": self.k,
            "subset": list(self.subset),
            "log_alpha1": real_json(self.log_alpha1),
            "nondominant_neg_log_moduli": [real_json(v) for v in self.nondominant_log_moduli],
            "dominance_margin": real_json(self.dominance_margin),
            "working_precision": self.working_precision,
            "ok": self.passed,
        }


def independence_certificate(roots: RootSet,
                             subset: Optional[Sequence[int]] = None) -> IndependenceCertificate:
    """Certify strict diagonal dominance for a set of k-1 roots.

    ``subset`` lists root indices (0 = dominant, 1..k-1 = ``roots.others``);
    default is the first k-1.  The modulus argument is permutation
    independent, so any subset yields the same margins.
    """
    k = roots.k
    if subset is None:
        subset = tuple(range(k - 1))
    subset = tuple(sorted(set(subset)))
    if len(subset) != k - 1 or not all(0 <= i < k for i in subset):
        raise ValueError(f"subset must name k-1 = {k - 1} distinct roots in 0..{k - 1}")
    with working_bits(roots.working_precision):
        log_a1 = iv.log(roots.dominant)
        neg_logs = []
        for disk in roots.others:
            m = disk.modulus()
            if greater(m, 0) is not True:
                raise PrecisionError("root modulus enclosure touches 0", roots.working_precision)
            v = -iv.log(m)
            if greater(v, 0) is not True:
                raise PrecisionError("non-dominant modulus enclosure touches 1",
                                     roots.working_precision)
            neg_logs.append(v)
        total = sum(neg_logs, iv.mpf(0))
        if not contains(total - log_a1, 0):
            raise PrecisionError("log-moduli do not sum to zero", roots.working_precision)
        margin = neg_logs[0]
        for v in neg_logs[1:]:
            margin = iv.mpf([min(margin.a, v.a), min(margin.b, v.b)])
    return IndependenceCertificate(k, log_a1, tuple(neg_logs), margin, subset,
                                   roots.working_precision)


# ---------------------------------------------------------------------------
# bounded relation search
# ---------------------------------------------------------------------------

def _log_data(roots: RootSet, bits: int):
    """High-precision log-moduli and arguments from the root centers."""
    with working_bits(bits):
        pts = [mpmath.mpf(roots.dominant.mid)] + [d.center for d in roots.others]
        logs = [mpmath.log(abs(z)) for z in pts]
        args = [mpmath.arg(z) for z in pts]
    return logs, args


def _is_candidate(m: Sequence[int], logs, args, radius, max_order: int) -> bool:
    s = mpmath.fsum(mi * li for mi, li in zip(m, logs))
    if abs(s) > radius:
        return False
    # the product must be a root of unity: argument/2pi close to j/N, N <= max_order
    t = mpmath.fsum(mi * ai for mi, ai in zip(m, args)) / (2 * mp.pi)
    t -= mpmath.floor(t)
    for order in range(1, max_order + 1):
        j = mpmath.nint(t * order)
        if abs(t - j / order) <= radius:
            return True
    return False


def relation_probe(roots: RootSet, exponent_bound: int,
                   max_order: Optional[int] = None,
                   include_trivial: bool = False) -> list[tuple[int, ...]]:
    """All m in [-B, B]^k with alpha_1^m1 ... alpha_k^mk numerically a root of unity.

    A float64 pre-filter on the log-moduli prunes the box; survivors are
    checked at the roots' precision with tolerance 2^(-precision/4) times
    the log-vector norm, then re-checked at doubled precision.
    """
    if exponent_bound < 1:
        raise ValueError("exponent_bound must be >= 1")
    k, bits = roots.k, roots.working_precision
    if max_order is None:
        max_order = 2 * k
    logs, args = _log_data(roots, bits)
    log_arr = np.array([float(v) for v in logs])
    rng = np.arange(-exponent_bound, exponent_bound + 1)
    grid = np.stack(np.meshgrid(*([rng] * k), indexing="ij"), axis=-1).reshape(-1, k)
    sums = grid @ log_arr
    survivors = grid[np.abs(sums) < 1e-6 * max(1.0, float(np.abs(log_arr).sum()))]

    def check(vectors, roots_at, bits_at):
        lg, ag = _log_data(roots_at, bits_at)
        with working_bits(bits_at):
            norm = mpmath.sqrt(mpmath.fsum(v * v for v in lg))
            radius = mpmath.mpf(2) ** (-bits_at // 4) * norm
            return [tuple(int(x) for x in m) for m in vectors
                    if _is_candidate(m, lg, ag, radius, max_order)]

    first = check(survivors, roots, bits)
    confirmed = check(first, certified_roots(k, 2 * bits), 2 * bits)
    if not include_trivial:
        confirmed = [m for m in confirmed if any(m)]
    return sorted(confirmed)


def is_all_ones_multiple(m: Sequence[int]) -> bool:
    return len(set(m)) == 1
