"""Acceptance criteria, one check per criterion.

Each check prints a single ``ACCEPT <n> PASS|FAIL`` line.  Run directly with
``python3 tests/test_acceptance.py`` or through pytest (``-s`` shows lines).
"""
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kfibtriples.asymptotics import (ExpansionConfig, eval_expansion, exact_c, expand_c,
                                     monomial_decay_check)
from kfibtriples.bounds import gcd_scan, verify_binet_residuals, verify_root_window, verify_size_bounds
from kfibtriples.charpoly import (binet_coefficients, certified_roots, norm_linear_form,
                                  norm_linear_form_numeric)
from kfibtriples.cli import dispatch
from kfibtriples.enclosures import contains, upper, working_bits
from kfibtriples.multindep import independence_certificate, is_all_ones_multiple, relation_probe
from kfibtriples.sequence import cache_for
from kfibtriples.squares import discriminant, is_perfect_square
from kfibtriples.triples import brute_force_values, search


def c1_root_window():
    bad = [k for k in range(2, 51) if not verify_root_window(k)]
    return not bad, f"k=2..50, failures={bad}"


def c2_binet_residuals():
    bad = [(k, r.n) for k in range(2, 11) for r in verify_binet_residuals(k, 200) if not r.ok]
    return not bad, f"k=2..10 n=1..200, failures={bad[:5]}"


def c3_size_bounds():
    bad = [(k, n) for k in range(2, 11)
           for n, ok in enumerate(verify_size_bounds(k, 200), start=2) if n >= 3 and not ok]
    return not bad, f"k=2..10 n=3..200, failures={bad[:5]}"


def c4_gcd_scan():
    recs = [r for k in range(2, 6) for r in gcd_scan(k, 120)]
    bad = [(r.k, r.x, r.y) for r in recs if not r.ok]
    return not bad and len(recs) > 27000, f"records={len(recs)}, failures={bad[:5]}"


def c5_independence():
    bad = []
    for k in range(2, 21):
        if not independence_certificate(certified_roots(k)).passed:
            bad.append(k)
    extra = []
    for k in range(2, 7):
        extra += [(k, m) for m in relation_probe(certified_roots(k), 4) if not is_all_ones_multiple(m)]
    return not bad and not extra, f"certificate failures={bad}, non-trivial relations={extra}"


def c6_norms():
    bad = []
    for k in range(2, 13):
        lin = norm_linear_form(k, k + 1, 2 * k)
        num = norm_linear_form_numeric(certified_roots(k), k + 1, 2 * k)
        ok = (abs(norm_linear_form(k, 1, 0)) == 1 and abs(norm_linear_form(k, 1, 1)) == k - 1
              and lin * (k - 1) == 2 ** (k + 1) * k ** k - (k + 1) ** (k + 1)
              and contains(num, lin))
        if not ok:
            bad.append(k)
    return not bad, f"k=2..12, failures={bad}"


def c7_square_scan():
    squares = [k for k in range(2, 2001) if is_perfect_square(discriminant(k))[0]]
    mod4 = [k for k in range(4, 2001, 4) if discriminant(k) % 4 != 3]
    # spot values by hand: 2^3*4 - 27, 2^4*27 - 256, 2^5*256 - 3125
    spots = (discriminant(2), discriminant(3), discriminant(4)) == (5, 176, 5067)
    return not squares and not mod4 and spots, f"squares={squares}, mod4 failures={mod4}, spots={spots}"


def c8_search_k2(tmp_dir):
    out = Path(tmp_dir) / "k2.jsonl"
    code = dispatch(["search", "--k", "2", "--z-max", "40", "-o", str(out),
                     "--manifest-dir", str(Path(tmp_dir) / "runs")])
    n = len(out.read_text().splitlines())
    return code == 0 and n == 0, f"exit={code}, solutions={n}"


def c9_oracle_equivalence():
    details = []
    ok = True
    for k in (2, 3, 4):
        cache = cache_for(k)
        z = 1
        while cache[z + 1] <= 10 ** 6:
            z += 1
        brute = [(s.a, s.b, s.c) for s in brute_force_values(k, 10 ** 6)]
        for prune in (True, False):
            idx = [(s.a, s.b, s.c) for s in search(k, z, prune=prune)]
            ok = ok and idx == brute
        details.append(f"k={k} z_max={z} n={len(brute)}")
    return ok, ", ".join(details)


def c10_expansion():
    rs = certified_roots(2, 192)
    co = binet_coefficients(rs)
    x, y, z = 10, 12, 14
    exact = exact_c(2, x, y, z, rs.working_precision)
    errs, decay = [], True
    for T in range(5):
        cfg = ExpansionConfig.for_point(T, x, y, z)
        terms = expand_c(2, cfg, rs, co)
        approx = eval_expansion(terms, cfg, x, y, z, rs, co)
        with working_bits(rs.working_precision):
            errs.append(upper(abs(approx - exact) / exact))
        if len(terms) > 1:
            decay = decay and all(monomial_decay_check(terms, x, y, z, rs))
    mono = all(b <= a for a, b in zip(errs, errs[1:]))
    ok = errs[0] < Fraction(1, 100) and mono and decay
    return ok, "rel errors T=0..4: " + ", ".join(f"{float(e):.2e}" for e in errs)


CRITERIA = [
    (1, "root window", c1_root_window),
    (2, "Binet residuals", c2_binet_residuals),
    (3, "size bounds", c3_size_bounds),
    (4, "gcd scan", c4_gcd_scan),
    (5, "independence", c5_independence),
    (6, "norm identities", c6_norms),
    (7, "square scan", c7_square_scan),
    (8, "Fibonacci search", c8_search_k2),
    (9, "search oracle equivalence", c9_oracle_equivalence),
    (10, "expansion validation", c10_expansion),
]


def _run(num, name, fn, tmp_dir=None):
    t0 = time.perf_counter()
    ok, detail = fn(tmp_dir) if fn is c8_search_k2 else fn()
    line = f"ACCEPT {num:2d} {'PASS' if ok else 'FAIL'} {name} ({time.perf_counter() - t0:.1f}s): {detail}"
    print(line)
    return ok, line


@pytest.mark.parametrize("num,name,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_acceptance(num, name, fn, tmp_path, capsys):
    ok, line = _run(num, name, fn, tmp_path)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    import tempfile
    with tempfile.TemporaryDirectory() as d:
        results = [_run(n, name, fn, d)[0] for n, name, fn in CRITERIA]
    sys.exit(0 if all(results) else 1)
