from fractions import Fraction
import math

import pytest
from mpmath import mp, mpf

from kfibtriples.bounds import (gcd_scan, size_bound_records, verify_binet_residuals,
                                verify_root_window, verify_size_bounds)
from kfibtriples.enclosures import contains, greater, less

from conftest import mid, naive_kfib, oracle_root_and_f1


@pytest.mark.parametrize("k", [2, 3, 10])
def test_root_window_examples(k):
    assert verify_root_window(k) is True


def test_root_window_k10_above_1_9():
    a, _ = oracle_root_and_f1(10)
    assert a > mpf("1.9")


def test_size_bounds_k2_n10():
    recs = size_bound_records(2, 10)
    assert recs[-1].n == 10 and recs[-1].ok
    # phi^8 ~ 46.98 < 55 < phi^9 ~ 76.01 (oracle)
    a, _ = oracle_root_and_f1(2)
    assert a ** 8 < 55 < a ** 9


def test_size_bounds_boundary_n2_records_lower_failure():
    rec = size_bound_records(3, 3)[0]
    assert rec.n == 2 and rec.lower_ok is False and rec.upper_ok is True
    for k in range(2, 8):
        assert size_bound_records(k, 2)[0].lower_ok is False


def test_size_bounds_k4_n50():
    assert all(verify_size_bounds(4, 50)[1:])


def test_size_bounds_against_float_oracle():
    a, _ = oracle_root_and_f1(5)
    recs = size_bound_records(5, 60)
    for r in recs:
        f = naive_kfib(5, r.n)
        with mp.workdps(60):
            assert r.lower_ok == (a ** (r.n - 2) < f)
            assert r.upper_ok == (f < a ** (r.n - 1))


def test_binet_residual_examples():
    r0, r1 = verify_binet_residuals(2, 1, n_min=0)
    assert r0.n == 0 and r0.ok and less(abs(r0.residual - mpf("-0.4472135955")), Fraction(1, 10 ** 9))
    assert r1.ok and less(abs(r1.residual - mpf("0.2763932023")), Fraction(1, 10 ** 9))


def test_binet_residual_k3_n10_against_oracle():
    a, f1 = oracle_root_and_f1(3)
    rec = verify_binet_residuals(3, 10)[-1]
    assert rec.n == 10 and rec.ok
    with mp.workdps(60):
        expected = 149 - f1 * a ** 10  # ~ +0.01983
        assert abs(mid(rec.residual) - expected) < mpf(10) ** -30
    assert greater(rec.residual, 0)


def test_binet_residual_ok_matches_enclosure():
    for rec in verify_binet_residuals(4, 30):
        assert rec.ok == (greater(rec.residual, Fraction(-1, 2)) and less(rec.residual, Fraction(1, 2)))


def test_binet_residual_bad_range():
    with pytest.raises(ValueError):
        verify_binet_residuals(3, 0, n_min=2)


@pytest.mark.parametrize("k,x,y,d,bound", [(2, 7, 5, 4, "9.4466028"), (3, 6, 5, 6, "15.5211"),
                                           (2, 4, 3, 1, None)])
def test_gcd_examples(k, x, y, d, bound):
    rec = next(r for r in gcd_scan(k, x) if r.x == x and r.y == y)
    assert rec.gcd_value == d == math.gcd(naive_kfib(k, x) - 1, naive_kfib(k, y) - 1)
    assert rec.ok
    if bound is not None:
        assert less(abs(rec.bound - mpf(bound)), Fraction(1, 10 ** 4))


def test_gcd_records_cover_all_pairs_and_divide():
    recs = gcd_scan(3, 30)
    assert {(r.x, r.y) for r in recs} == {(x, y) for x in range(4, 31) for y in range(3, x)}
    for r in recs:
        assert (naive_kfib(3, r.x) - 1) % r.gcd_value == 0
        assert (naive_kfib(3, r.y) - 1) % r.gcd_value == 0
        assert r.ok == bool(greater(r.bound, r.gcd_value))


def test_gcd_bound_exponent_against_oracle():
    a, _ = oracle_root_and_f1(4)
    rec = next(r for r in gcd_scan(4, 40) if r.x == 40)
    with mp.workdps(60):
        assert abs(mid(rec.bound) - a ** (mpf(4 * 40) / 5)) < mpf(10) ** -20


def test_gcd_scan_reports_failures_as_data(monkeypatch):
    import kfibtriples.bounds as b
    from mpmath import iv
    # a tiny bound forces ok=False records instead of exceptions
    monkeypatch.setattr(b, "_gcd_bound", lambda k, x, bits: iv.mpf("0.5"))
    recs = b.gcd_scan(2, 6)
    assert recs and not any(r.ok for r in recs)
