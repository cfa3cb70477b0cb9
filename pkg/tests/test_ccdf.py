import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from txcap.ccdf import (
    ExpPoly,
    ExpPolyCcdf,
    chi_square_ccdf,
    evaluate,
    multiply,
    selection_ccdf,
    tx_selection_mrc_ccdf,
    wishart_max_eig_ccdf,
)
from txcap.errors import FeasibilityError, ValidityError

GOLDEN = Path(__file__).parent / "golden"
GRID = np.linspace(0.0, 50.0, 2001)

RAYLEIGH = ExpPolyCcdf({(1, 0): 1})


def _sympy_coefficients(expr, x):
    """Coefficients a_nk of an expression in e^{-x} and x, via sympy expansion."""
    t = sp.Symbol("t")  # stands for e^{-x}
    poly = sp.Poly(sp.expand(expr.subs(sp.exp(-x), t)), t, x)
    return {(int(n), int(k)): Fraction(str(c)) for (n, k), c in poly.terms()}


def assert_ccdf_invariants(f):
    values = f.evaluate(GRID)
    assert f.evaluate(0.0) == pytest.approx(1.0, abs=1e-12)
    assert values.min() >= -1e-9 and values.max() <= 1 + 1e-9
    assert np.max(np.diff(values)) <= 1e-9
    assert all(n >= 1 for n, _ in f.terms)


def test_evaluate_examples():
    assert evaluate(RAYLEIGH, 0.0) == 1.0
    assert evaluate(RAYLEIGH, 1.0) == pytest.approx(0.36787944117144233, rel=1e-15)
    mrt = ExpPolyCcdf({(1, 0): 2, (2, 0): -1, (1, 2): 1})
    expected = 2 * math.exp(-1) - math.exp(-2) + math.exp(-1)
    assert evaluate(mrt, 1.0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.968303, abs=1e-6)


def test_evaluate_vectorized():
    xs = np.array([0.0, 0.5, 2.0])
    np.testing.assert_allclose(RAYLEIGH.evaluate(xs), np.exp(-xs), rtol=1e-15)


def test_chi_square_examples():
    assert chi_square_ccdf(1) == RAYLEIGH
    assert chi_square_ccdf(2).terms == {(1, 0): 1, (1, 1): 1}
    assert chi_square_ccdf(4).evaluate(4.0) == pytest.approx(special.gammaincc(4, 4.0), rel=1e-13)
    assert chi_square_ccdf(4).evaluate(4.0) == pytest.approx(0.43347, abs=1e-5)


@pytest.mark.parametrize("m", [1, 2, 3, 6, 10, 16])
def test_chi_square_matches_regularized_gamma(m):
    xs = np.linspace(0, 40, 81)
    np.testing.assert_allclose(chi_square_ccdf(m).evaluate(xs), special.gammaincc(m, xs), rtol=1e-10, atol=1e-15)


def test_multiply_examples():
    e1 = ExpPoly.monomial(1, 0)
    assert multiply(e1, e1) == ExpPoly.monomial(2, 0)
    xe = ExpPoly.monomial(1, 1)
    assert multiply(xe, xe) == ExpPoly.monomial(2, 2)
    one_minus = 1 - e1
    assert multiply(one_minus, one_minus) == ExpPoly({(0, 0): 1, (1, 0): -2, (2, 0): 1})


def test_multiply_pointwise():
    rng = np.random.default_rng(2024)
    f = ExpPoly({(0, 0): 1, (1, 1): Fraction(-3, 2), (2, 0): 2})
    g = ExpPoly({(1, 0): 1, (3, 2): Fraction(1, 7)})
    xs = rng.uniform(0, 10, 20)
    np.testing.assert_allclose((f * g).evaluate(xs), f.evaluate(xs) * g.evaluate(xs), rtol=1e-12, atol=1e-15)


@settings(max_examples=40, deadline=None)
@given(
    st.dictionaries(
        st.tuples(st.integers(0, 3), st.integers(0, 3)), st.fractions(min_value=-5, max_value=5, max_denominator=20),
        max_size=4,
    ),
    st.dictionaries(
        st.tuples(st.integers(0, 3), st.integers(0, 3)), st.fractions(min_value=-5, max_value=5, max_denominator=20),
        max_size=4,
    ),
    st.floats(0, 8),
)
def test_multiply_is_pointwise_product(ft, gt, x):
    f, g = ExpPoly(ft), ExpPoly(gt)
    assert (f * g).evaluate(x) == pytest.approx(f.evaluate(x) * g.evaluate(x), rel=1e-9, abs=1e-9)


def test_selection_examples():
    assert selection_ccdf(1) == RAYLEIGH
    assert selection_ccdf(2).terms == {(1, 0): 2, (2, 0): -1}
    assert selection_ccdf(4).evaluate(1.0) == pytest.approx(1 - (1 - math.exp(-1)) ** 4, rel=1e-14)
    assert selection_ccdf(4).evaluate(1.0) == pytest.approx(0.840339, abs=1e-6)


@pytest.mark.parametrize("m", [6, 10, 16])
def test_selection_survives_cancellation(m):
    xs = np.linspace(0, 30, 301)
    np.testing.assert_allclose(selection_ccdf(m).evaluate(xs), 1 - (1 - np.exp(-xs)) ** m, atol=1e-10)


def test_tx_selection_examples():
    for mr in range(1, 5):
        assert tx_selection_mrc_ccdf(1, mr) == chi_square_ccdf(mr)
    for mt in range(1, 5):
        assert tx_selection_mrc_ccdf(mt, 1) == selection_ccdf(mt)
    x = sp.Symbol("x", positive=True)
    oracle = _sympy_coefficients(1 - (1 - sp.exp(-x) * (1 + x)) ** 2, x)
    assert oracle == {(1, 0): 2, (1, 1): 2, (2, 0): -1, (2, 1): -2, (2, 2): -1}
    assert tx_selection_mrc_ccdf(2, 2).terms == oracle


@pytest.mark.parametrize("mt", [1, 2, 3, 4])
@pytest.mark.parametrize("mr", [1, 2, 3, 4])
def test_tx_selection_closed_form_matches_expansion(mt, mr):
    closed = tx_selection_mrc_ccdf(mt, mr, method="closed_form")
    expanded = tx_selection_mrc_ccdf(mt, mr, method="expand")
    assert closed.terms == expanded.terms


@pytest.mark.parametrize("mt,mr", [(3, 2), (2, 4)])
def test_tx_selection_matches_sympy(mt, mr):
    x = sp.Symbol("x", positive=True)
    partial = sum(x**k / sp.factorial(k) for k in range(mr))
    oracle = _sympy_coefficients(1 - (1 - sp.exp(-x) * partial) ** mt, x)
    assert tx_selection_mrc_ccdf(mt, mr).terms == oracle


def test_wishart_vector_channel_is_chi_square():
    for m in range(1, 6):
        assert wishart_max_eig_ccdf(1, m) == chi_square_ccdf(m)
        assert wishart_max_eig_ccdf(m, 1) == chi_square_ccdf(m)


def test_wishart_2x2_golden():
    w = wishart_max_eig_ccdf(2, 2)
    assert w.terms == {(1, 0): Fraction(2), (2, 0): Fraction(-1), (1, 2): Fraction(1)}
    assert w.to_table() == (GOLDEN / "wishart_2x2.tsv").read_text()


def test_wishart_2x3_golden_table():
    w = wishart_max_eig_ccdf(2, 3)
    assert w.to_table() == (GOLDEN / "wishart_2x3.tsv").read_text()
    assert ExpPolyCcdf.from_table(w.to_table()) == w


@pytest.mark.parametrize("mt", range(1, 5))
@pytest.mark.parametrize("mr", range(1, 6))
def test_wishart_symmetric(mt, mr):
    assert wishart_max_eig_ccdf(mt, mr) == wishart_max_eig_ccdf(mr, mt)


def test_wishart_mean_2x2():
    # E[λmax] of a 2x2 complex Wishart is 7/2
    assert wishart_max_eig_ccdf(2, 2).mean() == Fraction(7, 2)


def test_wishart_order_cap():
    with pytest.raises(FeasibilityError):
        wishart_max_eig_ccdf(5, 5)
    wishart_max_eig_ccdf(4, 6)


def test_wishart_2x3_matches_monte_carlo():
    rng = np.random.default_rng(31337)
    n = 1_000_000
    h = (rng.standard_normal((n, 3, 2)) + 1j * rng.standard_normal((n, 3, 2))) / math.sqrt(2)
    gram = np.einsum("nki,nkj->nij", h.conj(), h)
    lmax = np.linalg.eigvalsh(gram)[:, -1]
    w = wishart_max_eig_ccdf(2, 3)
    for x in np.linspace(0.5, 12.0, 10):
        p_hat = np.mean(lmax > x)
        p = w.evaluate(x)
        se = math.sqrt(p * (1 - p) / n)
        assert abs(p_hat - p) <= 3 * se, (x, p_hat, p)


CONSTRUCTORS = (
    [chi_square_ccdf(m) for m in range(1, 17)]
    + [selection_ccdf(m) for m in range(1, 17)]
    + [tx_selection_mrc_ccdf(mt, mr) for mt in range(1, 5) for mr in range(1, 5)]
    + [wishart_max_eig_ccdf(mt, mr) for mt in range(1, 5) for mr in range(mt, 7)]
)


@pytest.mark.parametrize("f", CONSTRUCTORS, ids=lambda f: f"terms{len(f)}")
def test_constructor_invariants(f):
    assert_ccdf_invariants(f)


@pytest.mark.parametrize("m", range(1, 16))
def test_chi_square_stochastic_ordering(m):
    assert np.all(chi_square_ccdf(m + 1).evaluate(GRID) >= chi_square_ccdf(m).evaluate(GRID) - 1e-15)


def test_invalid_ccdf_rejected():
    # x e^{-x} is not a CCDF (does not start at 1)
    with pytest.raises(ValidityError):
        ExpPolyCcdf({(1, 1): 1})
    with pytest.raises(ValidityError):
        ExpPolyCcdf({(0, 0): 1})
    with pytest.raises(ValidityError):
        ExpPolyCcdf({(1, 0): 2, (1, 1): -5, (2, 0): -1})


def test_zero_terms_pruned():
    f = ExpPoly({(1, 0): 1, (2, 0): 0}) + ExpPoly({(1, 0): -1})
    assert len(f) == 0


def test_table_roundtrip_rejects_bad_header():
    with pytest.raises(ValueError):
        ExpPoly.from_table("a b c d\n1 0 1 1\n")
