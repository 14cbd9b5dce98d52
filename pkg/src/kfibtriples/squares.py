"""Perfect-square scan of 2^(k+1) k^k - (k+1)^(k+1) with residue witnesses."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

# moduli for the quadratic-residue pre-filter (product 64*63*65*11)
_QR_MODULI = (64, 63, 65, 11)
_QR_TABLES = {m: frozenset(i * i % m for i in range(m)) for m in _QR_MODULI}


def discriminant(k: int) -> int:
    """Exact 2^(k+1) k^k - (k+1)^(k+1)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    return 2 ** (k + 1) * k ** k - (k + 1) ** (k + 1)


def is_perfect_square(n: int) -> tuple[bool, Optional[int]]:
    """(is_square, floor(sqrt(n))); negative input gives (False, None)."""
    if n < 0:
        return False, None
    for m, residues in _QR_TABLES.items():
        if n % m not in residues:
            return False, math.isqrt(n)
    r = math.isqrt(n)
    return r * r == n, r


def _smallest_prime_factor_3mod4(n: int) -> Optional[int]:
    m, p = n, 2
    while p * p <= m:
        if m % p == 0:
            if p % 4 == 3:
                return p
            while m % p == 0:
                m //= p
        p += 1
    return m if m > 1 and m % 4 == 3 else None


@dataclass(frozen=True)
class ResidueWitness:
    k: int
    tag: str  # "mod4", "coprime-two-squares" or "external"
    data: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        if self.tag == "mod4":
            return self.data["D_mod_4"] == 3
        if self.tag == "coprime-two-squares":
            return (self.data["gcd"] == 1 and self.data["prime"] is not None
                    and self.data["prime"] % 4 == 3 and self.data["reduction_ok"])
        return False

    def to_json(self) -> dict:
        return {"tag": self.tag, "k_mod_4": self.k % 4,
                **{key: (str(v) if isinstance(v, int) and not isinstance(v, bool) else v)
                   for key, v in self.data.items()},
                "certified": self.certified}


def residue_witness(k: int) -> ResidueWitness:
    """Residue-class certificate that D(k) is not a square, where one exists.

    k = 0 mod 4: D(k) = 3 mod 4.  k = 3 mod 4: with m = (k+1)/2 a square
    D(k) = w^2 would give k^k = w1^2 + (m^((k+1)/2))^2 with coprime
    summands, impossible since k has a prime factor p = 3 mod 4.
    Other classes are tagged "external".
    """
    d = discriminant(k)
    r = k % 4
    if r == 0:
        return ResidueWitness(k, "mod4", {"D_mod_4": d % 4})
    if r == 3:
        m = (k + 1) // 2
        reduced = k ** k - m ** (k + 1)
        sq, w1_floor = is_perfect_square(reduced)
        return ResidueWitness(k, "coprime-two-squares", {
            "gcd": math.gcd(k, m),
            "prime": _smallest_prime_factor_3mod4(k),
            "reduced": reduced,
            "reduction_ok": 2 ** (k + 1) * reduced == d,
            "w1_floor": w1_floor,
            "reduced_is_square": sq,
        })
    return ResidueWitness(k, "external")


@dataclass(frozen=True)
class SquareScanRecord:
    k: int
    D: int
    isqrt_floor: Optional[int]
    is_square: bool
    witness: ResidueWitness

    def to_json(self) -> dict:
        return {"check": "square-scan", "k": self.k, "D": str(self.D),
                "isqrt_floor": None if self.isqrt_floor is None else str(self.isqrt_floor),
                "is_square": self.is_square, "witness": self.witness.to_json(),
                "ok": not self.is_square}


def scan(k_max: int, k_min: int = 2) -> list[SquareScanRecord]:
    if k_max < 2 or k_min < 2:
        raise ValueError("k range must start at >= 2")
    out = []
    for k in range(k_min, k_max + 1):
        d = discriminant(k)
        sq, r = is_perfect_square(d)
        out.append(SquareScanRecord(k, d, r, sq, residue_witness(k)))
    return out
