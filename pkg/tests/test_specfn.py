import itertools
import math

import numpy as np
import pytest
from scipy import integrate

from txcap.specfn import beta, gamma, integer_compositions, lower_incomplete_gamma_int, subsets_of_size


@pytest.mark.parametrize(
    "t,expected",
    [(1.0, 1.0), (0.5, math.sqrt(math.pi)), (3.0, 2.0)],
)
def test_gamma_examples(t, expected):
    assert gamma(t) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("t", np.round(np.arange(0.1, 10.01, 0.1), 10))
def test_gamma_recurrence(t):
    assert gamma(t + 1) == pytest.approx(t * gamma(t), rel=1e-10)


@pytest.mark.parametrize("t", [0.0, -1.0, -0.5])
def test_gamma_domain(t):
    with pytest.raises(ValueError):
        gamma(t)


def _beta_quad(a, b):
    val, _ = integrate.quad(lambda t: t ** (a - 1) * (1 - t) ** (b - 1), 0, 1, limit=200)
    return val


@pytest.mark.parametrize(
    "a,b,expected",
    [(1, 1, 1.0), (0.5, 1.5, math.pi / 2), (0.5, 0.5, math.pi)],
)
def test_beta_examples(a, b, expected):
    assert beta(a, b) == pytest.approx(expected, rel=1e-12)
    assert beta(a, b) == pytest.approx(_beta_quad(a, b), rel=1e-7)


def test_beta_domain():
    with pytest.raises(ValueError):
        beta(0, 1)
    with pytest.raises(ValueError):
        beta(1, -2)


def _lower_gamma_quad(n, x):
    val, _ = integrate.quad(lambda t: t ** (n - 1) * math.exp(-t), 0, x, epsabs=0, epsrel=1e-13, limit=200)
    return val


def test_lower_incomplete_gamma_examples():
    assert lower_incomplete_gamma_int(1, 0) == 0.0
    for x in (0.1, 1.0, 7.5):
        assert lower_incomplete_gamma_int(1, x) == pytest.approx(1 - math.exp(-x), rel=1e-14)
    # quadrature oracle: 2 - 10 e^{-2}
    assert lower_incomplete_gamma_int(3, 2.0) == pytest.approx(0.6466471676338731, rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13])
@pytest.mark.parametrize("x", [1e-4, 0.01, 0.5, 2.0, 6.0, 15.0, 30.0])
def test_lower_incomplete_gamma_matches_quadrature(n, x):
    assert lower_incomplete_gamma_int(n, x) == pytest.approx(_lower_gamma_quad(n, x), rel=1e-10)


@pytest.mark.parametrize("n", [1, 2, 4, 7, 10])
def test_lower_incomplete_gamma_saturates(n):
    assert lower_incomplete_gamma_int(n, 50.0) == pytest.approx(math.factorial(n - 1), rel=1e-10)


def test_lower_incomplete_gamma_domain():
    with pytest.raises(ValueError):
        lower_incomplete_gamma_int(0, 1.0)
    with pytest.raises(ValueError):
        lower_incomplete_gamma_int(2, -1.0)


def test_compositions_examples():
    assert integer_compositions(2, 2, 1) == [(1, 1)]
    assert integer_compositions(0, 3, 5) == [(0, 0, 0)]
    assert integer_compositions(2, 2, 2) == [(0, 2), (1, 1), (2, 0)]
    assert integer_compositions(7, 2, 3) == []


@pytest.mark.parametrize("k,m,cap", [(k, m, c) for k in range(0, 7) for m in range(1, 4) for c in range(0, 4)])
def test_compositions_match_brute_force(k, m, cap):
    brute = sorted(t for t in itertools.product(range(cap + 1), repeat=m) if sum(t) == k)
    got = integer_compositions(k, m, cap)
    assert len(got) == len(set(got))
    assert sorted(got) == brute


def test_subsets():
    assert subsets_of_size(3, 2) == [(1, 2), (1, 3), (2, 3)]
    assert subsets_of_size(5, 0) == [()]
    assert len(subsets_of_size(4, 2)) == math.comb(4, 2)
    for a in range(7):
        for b in range(a + 1):
            subs = subsets_of_size(a, b)
            assert len(subs) == math.comb(a, b)
            assert all(list(s) == sorted(s) for s in subs)
    with pytest.raises(ValueError):
        subsets_of_size(2, 3)
