import pytest
from mpmath import mp, mpf, findroot


def naive_kfib(k, n):
    """Reference recurrence, independent of the library cache."""
    terms = [0] * (k - 1) + [1]
    while len(terms) - (k - 2) <= n:
        terms.append(sum(terms[-k:]))
    return terms[n + k - 2]


def oracle_root_and_f1(k, dps=60):
    """Dominant root by Newton from 2 and f_1 as the limit F_n / alpha^n."""
    with mp.workdps(dps):
        a = findroot(lambda x: x ** k - sum(x ** i for i in range(k)), mpf(2))
        f1 = naive_kfib(k, 400) / a ** 400
        return +a, +f1


def mid(enc):
    """Midpoint of an interval as a 60-digit mpf."""
    from kfibtriples.enclosures import lower, upper
    with mp.workdps(60):
        return mpf((lower(enc) + upper(enc)).numerator) / (lower(enc) + upper(enc)).denominator / 2


@pytest.fixture
def manifest_dir(tmp_path):
    return tmp_path / "runs"
