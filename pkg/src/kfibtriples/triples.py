"""Index-side search for triples 1 < a < b < c with ab+1, ac+1, bc+1 in the sequence.

For each admissible (x, y, z) the candidate is
a = sqrt((F_x - 1)(F_y - 1) / (F_z - 1)), b = (F_x - 1)/a, c = (F_y - 1)/a.
Pruning uses y >= z/2 and x > z/(k+1) - 2 (each with slack 2), both valid for
every genuine solution.
"""
from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .sequence import SequenceCache, cache_for, membership
from .squares import is_perfect_square

log = logging.getLogger(__name__)

SLACK = 2
MIN_X = 4


@dataclass(frozen=True, order=True)
class TripleIndex:
    x: int
    y: int
    z: int


@dataclass(frozen=True, order=True)
class TripleSolution:
    z: int
    y: int
    x: int
    a: int
    b: int
    c: int
    k: int

    def to_json(self) -> dict:
        return {f: str(getattr(self, f)) for f in ("k", "a", "b", "c", "x", "y", "z")}

    @classmethod
    def from_json(cls, d: dict) -> "TripleSolution":
        return cls(**{f: int(d[f]) for f in ("z", "y", "x", "a", "b", "c", "k")})


@dataclass
class SearchCheckpoint:
    k: int
    z_max: int
    cursor: int  # last fully processed z
    solutions: list[TripleSolution] = field(default_factory=list)
    timestamp: float = 0.0
    prune: bool = True

    def to_json(self) -> dict:
        return {"k": self.k, "z_max": self.z_max, "cursor": self.cursor,
                "prune": self.prune, "timestamp": self.timestamp,
                "solutions": [s.to_json() for s in self.solutions]}

    @classmethod
    def from_json(cls, d: dict) -> "SearchCheckpoint":
        return cls(int(d["k"]), int(d["z_max"]), int(d["cursor"]),
                   [TripleSolution.from_json(s) for s in d["solutions"]],
                   float(d.get("timestamp", 0.0)), bool(d.get("prune", True)))

    def save(self, path: os.PathLike) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(json.dumps(self.to_json(), indent=1), encoding="utf-8")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: os.PathLike) -> "SearchCheckpoint":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def admissible(k: int, x: int, y: int, z: int) -> bool:
    """Pruning test: 2y >= z - 2*SLACK and (k+1)(x + 2 + SLACK) > z."""
    return 2 * y >= z - 2 * SLACK and (k + 1) * (x + 2 + SLACK) > z


def solve_indices(cache: SequenceCache, x: int, y: int, z: int) -> Optional[TripleSolution]:
    """The triple attached to (x, y, z), if one exists."""
    fx, fy, fz = cache[x] - 1, cache[y] - 1, cache[z] - 1
    if fx <= 0 or fz <= 0:
        return None
    g = fx * fy
    q, r = divmod(g, fz)
    if r:
        return None
    sq, a = is_perfect_square(q)
    if not sq or a < 2:
        return None
    b, rb = divmod(fx, a)
    c, rc = divmod(fy, a)
    if rb or rc or not (1 < a < b < c) or b * c != fz:
        return None
    return TripleSolution(z, y, x, a, b, c, cache.k)


def search_layer(k: int, z: int, prune: bool = True) -> list[TripleSolution]:
    """All solutions with this z."""
    cache = cache_for(k)
    cache.extend_to(z)
    out = []
    y_lo = MIN_X
    if prune:
        y_lo = max(y_lo, -(-(z - 2 * SLACK) // 2))
    for y in range(y_lo, z + 1):
        for x in range(MIN_X, y + 1):
            if prune and not admissible(k, x, y, z):
                continue
            sol = solve_indices(cache, x, y, z)
            if sol is not None:
                out.append(sol)
    return out


def _layer_task(args):
    k, z, prune = args
    return z, search_layer(k, z, prune)


def search(k: int, z_max: int, checkpoint: Optional[SearchCheckpoint] = None,
           prune: bool = True, jobs: int = 1,
           checkpoint_path: Optional[os.PathLike] = None) -> list[TripleSolution]:
    """Exhaustive search over z <= z_max; resumable from a checkpoint.

    A checkpoint is written after every completed z-layer when
    ``checkpoint_path`` is given.
    """
    if z_max < 6:
        raise ValueError("z_max must be >= 6")
    solutions: list[TripleSolution] = []
    start = MIN_X
    if checkpoint is not None:
        if checkpoint.k != k:
            raise ValueError("checkpoint is for a different k")
        if checkpoint.prune != prune:
            raise ValueError("checkpoint was written with a different pruning mode")
        solutions = list(checkpoint.solutions)
        start = checkpoint.cursor + 1
    cache_for(k).extend_to(z_max)
    ckpt = SearchCheckpoint(k, z_max, start - 1, solutions, time.time(), prune)

    def done(z: int, found: list[TripleSolution]) -> None:
        ckpt.solutions.extend(found)
        ckpt.cursor = z
        ckpt.timestamp = time.time()
        if checkpoint_path is not None:
            ckpt.solutions.sort()
            ckpt.save(checkpoint_path)
        if found:
            log.info("z=%d: %d solution(s)", z, len(found))

    layers = range(start, z_max + 1)
    if jobs <= 1:
        for z in layers:
            done(z, search_layer(k, z, prune))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            # map preserves order, so checkpoints stay contiguous
            for z, found in pool.map(_layer_task, [(k, z, prune) for z in layers]):
                done(z, found)
    return sorted(ckpt.solutions)


def verify_solution(k: int, a: int, b: int, c: int) -> Optional[TripleIndex]:
    """Indices (x, y, z) with ab+1 = F_x, ac+1 = F_y, bc+1 = F_z, or None."""
    if not (1 < a < b < c):
        raise ValueError("need 1 < a < b < c")
    x = membership(k, a * b + 1)
    y = membership(k, a * c + 1) if x is not None else None
    z = membership(k, b * c + 1) if y is not None else None
    if z is None:
        return None
    return TripleIndex(x, y, z)


def brute_force_values(k: int, f_max: int) -> list[TripleSolution]:
    """Value-side oracle: every 1 < a < b < c with all three products+1 <= f_max in the sequence.

    Enumerates factorizations bc = v - 1 for sequence values v, then every
    a < b with ab + 1 a sequence value; no index arithmetic is used.
    """
    values, n = [], 1
    while kfib_value(k, n) <= f_max:
        values.append(kfib_value(k, n))
        n += 1
    vset = set(values)
    index = {}
    for i, v in enumerate(values, start=1):
        index.setdefault(v, i)
    found = set()
    for v in vset:
        m = v - 1
        b = 2
        while b * b < m:
            if m % b == 0:
                c = m // b
                for u in vset:
                    if (u - 1) % b == 0:
                        a = (u - 1) // b
                        if 1 < a < b and a * c + 1 in vset:
                            found.add(TripleSolution(index[v], index[a * c + 1], index[u],
                                                     a, b, c, k))
            b += 1
    return sorted(found)


def kfib_value(k: int, n: int) -> int:
    return cache_for(k)[n]


def write_jsonl(solutions: Iterable[TripleSolution], path: os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in solutions:
            fh.write(json.dumps(s.to_json()) + "\n")
