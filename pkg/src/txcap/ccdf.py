"""Exponential-polynomial CCDFs  F(x) = Σ_n e^{-n x} Σ_k a_nk x^k.

Coefficients are kept as exact :class:`fractions.Fraction` values while the
distributions are being assembled (products, powers, determinants) and only
turned into floats for evaluation.  The alternating binomial sums that show
up in selection combining and in the Wishart determinant lose most of their
digits in floating point once there are more than a few antennas.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import FeasibilityError, ValidityError
from .specfn import integer_compositions

__all__ = [
    "ExpPoly",
    "ExpPolyCcdf",
    "evaluate",
    "multiply",
    "chi_square_ccdf",
    "selection_ccdf",
    "tx_selection_mrc_ccdf",
    "wishart_max_eig_ccdf",
    "WISHART_MAX_ORDER",
]

Scalar = Union[int, Fraction]

# Leibniz expansion of the q x q Khatri determinant grows like q!; validated
# range is q <= 4.
WISHART_MAX_ORDER = 4

_GRID = np.linspace(0.0, 50.0, 2001)
_TOL = 1e-9


class ExpPoly:
    """Finite sum of terms a * e^{-n x} x^k with integer n, k >= 0."""

    __slots__ = ("_terms", "_by_n")

    def __init__(self, terms: Mapping[tuple[int, int], Scalar] | None = None):
        clean: dict[tuple[int, int], Fraction] = {}
        for (n, k), a in (terms or {}).items():
            if int(n) != n or int(k) != k or n < 0 or k < 0:
                raise ValueError(f"exponent index and power must be integers >= 0, got {(n, k)}")
            a = Fraction(a)
            if a:
                key = (int(n), int(k))
                clean[key] = clean.get(key, Fraction(0)) + a
        self._terms = {key: a for key, a in sorted(clean.items()) if a}
        self._by_n = None

    # -- construction helpers -------------------------------------------
    @classmethod
    def constant(cls, c: Scalar) -> "ExpPoly":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, n: int, k: int, a: Scalar = 1) -> "ExpPoly":
        return cls({(n, k): a})

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def max_power(self) -> int:
        return max((k for _, k in self._terms), default=0)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ExpPoly):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return f"{type(self).__name__}(0)"
        parts = []
        for (n, k), a in self._terms.items():
            piece = str(a)
            if k:
                piece += f"*x^{k}" if k > 1 else "*x"
            if n:
                piece += f"*e^(-{n}x)" if n > 1 else "*e^(-x)"
            parts.append(piece)
        return f"{type(self).__name__}({' + '.join(parts)})"

    # -- algebra ----------------------------------------------------------
    def _coerce(self, other) -> "ExpPoly":
        if isinstance(other, ExpPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return ExpPoly.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        merged = dict(self._terms)
        for key, a in other._terms.items():
            merged[key] = merged.get(key, Fraction(0)) + a
        return ExpPoly(merged)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly({key: -a for key, a in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ExpPoly({key: a * other for key, a in self._terms.items()})
        if not isinstance(other, ExpPoly):
            return NotImplemented
        out: dict[tuple[int, int], Fraction] = {}
        for (n1, k1), a1 in self._terms.items():
            for (n2, k2), a2 in other._terms.items():
                key = (n1 + n2, k1 + k2)
                out[key] = out.get(key, Fraction(0)) + a1 * a2
        return ExpPoly(out)

    __rmul__ = __mul__

    def __pow__(self, power: int):
        if int(power) != power or power < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = ExpPoly.constant(1)
        base = self
        p = int(power)
        while p:
            if p & 1:
                result = result * base
            base = base * base
            p >>= 1
        return result

    # -- evaluation -------------------------------------------------------
    def _grouped(self):
        if self._by_n is None:
            groups: dict[int, list[tuple[int, float]]] = {}
            for (n, k), a in self._terms.items():
                groups.setdefault(n, []).append((k, float(a)))
            self._by_n = [
                (n, np.array([k for k, _ in ks]), np.array([a for _, a in ks]))
                for n, ks in sorted(groups.items())
            ]
        return self._by_n

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        """Value at ``x`` (float or array)."""
        xs = np.asarray(x, dtype=float)
        total = np.zeros_like(xs)
        for n, ks, coeffs in self._grouped():
            poly = np.zeros_like(xs)
            for k, a in zip(ks, coeffs):
                poly = poly + a * xs**k
            total = total + np.exp(-n * xs) * poly
        if total.ndim == 0:
            return float(total)
        return total

    # -- serialization ----------------------------------------------------
    def to_table(self) -> str:
        """Plain-text table with header ``n k numerator denominator``."""
        lines = ["n\tk\tnumerator\tdenominator"]
        for (n, k), a in self._terms.items():
            lines.append(f"{n}\t{k}\t{a.numerator}\t{a.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_table(cls, text: str):
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or rows[0] != ["n", "k", "numerator", "denominator"]:
            raise ValueError("table must start with header 'n k numerator denominator'")
        terms = {}
        for row in rows[1:]:
            if len(row) != 4:
                raise ValueError(f"malformed row: {row!r}")
            n, k, num, den = (int(v) for v in row)
            terms[(n, k)] = terms.get((n, k), Fraction(0)) + Fraction(num, den)
        return cls(terms)


class ExpPolyCcdf(ExpPoly):
    """An :class:`ExpPoly` that has been checked to behave like a CCDF.

    The checks are the ones available without an analytic criterion: value 1
    at the origin (exactly, on the rational coefficients), every exponent
    index at least 1, and numerically nonincreasing and inside [0, 1] on a
    grid over [0, 50].
    """

    __slots__ = ()

    def __init__(self, terms: Mapping[tuple[int, int], Scalar] | None = None, *, validate: bool = True):
        super().__init__(terms)
        if validate:
            self._validate()

    @classmethod
    def from_function(cls, f: ExpPoly) -> "ExpPolyCcdf":
        return cls(f.terms)

    def _validate(self) -> None:
        if not self._terms:
            raise ValidityError("empty expansion is not a CCDF")
        if any(n < 1 for n, _ in self._terms):
            raise ValidityError("a CCDF in this family needs every exponent index n >= 1")
        at_zero = sum((a for (n, k), a in self._terms.items() if k == 0), Fraction(0))
        if at_zero != 1:
            raise ValidityError(f"CCDF must equal 1 at x=0, got {at_zero}")
        values = self.evaluate(_GRID)
        if values.min() < -_TOL or values.max() > 1 + _TOL:
            raise ValidityError("CCDF leaves [0, 1] on the validation grid")
        if np.max(np.diff(values)) > _TOL:
            raise ValidityError("CCDF is not nonincreasing on the validation grid")

    def mean(self) -> Fraction:
        """E[S] = ∫ F(x) dx, exact."""
        # ∫ e^{-n x} x^k dx = k! / n^{k+1}
        return sum(
            (a * math.factorial(k) / Fraction(n) ** (k + 1) for (n, k), a in self._terms.items()),
            Fraction(0),
        )


def evaluate(f: ExpPoly, x):
    """Σ_n e^{-n x} Σ_k a_nk x^k at ``x``."""
    return f.evaluate(x)


def multiply(f: ExpPoly, g: ExpPoly) -> ExpPoly:
    """Product of two exponential polynomials (exponents and powers add)."""
    return f * g


def _poisson_partial(m: int) -> ExpPoly:
    # e^{-x} Σ_{k<m} x^k/k!
    return ExpPoly({(1, k): Fraction(1, math.factorial(k)) for k in range(m)})


def chi_square_ccdf(m: int) -> ExpPolyCcdf:
    """CCDF of a sum of ``m`` unit-mean exponentials (χ² with 2m dof, halved)."""
    _check_count("m", m)
    return ExpPolyCcdf(_poisson_partial(m).terms)


def selection_ccdf(m_total: int) -> ExpPolyCcdf:
    """CCDF of the largest of ``m_total`` i.i.d. unit exponentials."""
    _check_count("m_total", m_total)
    return ExpPolyCcdf(
        {(k, 0): math.comb(m_total, k) * (-1) ** (k + 1) for k in range(1, m_total + 1)}
    )


def tx_selection_mrc_ccdf(m_t: int, m_r: int, method: str = "closed_form") -> ExpPolyCcdf:
    """Best of ``m_t`` transmit antennas, each seen through ``m_r``-branch MRC.

    ``method="closed_form"`` builds the coefficients from the composition
    sum; ``method="expand"`` computes 1 - (1 - e^{-x} Σ x^k/k!)^{m_t} with the
    product algebra.  Both give identical rational coefficients.
    """
    _check_count("m_t", m_t)
    _check_count("m_r", m_r)
    if method == "expand":
        return ExpPolyCcdf((1 - (1 - _poisson_partial(m_r)) ** m_t).terms)
    if method != "closed_form":
        raise ValueError(f"unknown method {method!r}")
    cap = m_r - 1
    terms: dict[tuple[int, int], Fraction] = {}
    for m in range(1, m_t + 1):
        sign = (-1) ** (m + 1)
        for k in range(m * cap + 1):
            s = sum(
                (
                    Fraction(1, math.prod(math.factorial(ni) for ni in comp))
                    for comp in integer_compositions(k, m, cap)
                ),
                Fraction(0),
            )
            if s:
                terms[(m, k)] = sign * math.comb(m_t, m) * s
    return ExpPolyCcdf(terms)


def _lower_gamma_poly(n: int) -> ExpPoly:
    # γ(n, x) = (n-1)! (1 - e^{-x} Σ_{k<n} x^k/k!)
    return math.factorial(n - 1) * (1 - _poisson_partial(n))


def _determinant(matrix: list[list[ExpPoly]]) -> ExpPoly:
    size = len(matrix)
    total = ExpPoly()
    for perm in itertools.permutations(range(size)):
        inversions = sum(1 for i in range(size) for j in range(i + 1, size) if perm[i] > perm[j])
        prod = ExpPoly.constant(1)
        for row, col in enumerate(perm):
            prod = prod * matrix[row][col]
        total = total + (prod if inversions % 2 == 0 else -prod)
    return total


def wishart_max_eig_ccdf(m_t: int, m_r: int) -> ExpPolyCcdf:
    """CCDF of the largest eigenvalue of H Hᴴ for an i.i.d. CN(0,1) m_r x m_t H.

    Expands the Khatri determinant with integer-order incomplete gammas.
    Raises :class:`FeasibilityError` when min(m_t, m_r) exceeds
    :data:`WISHART_MAX_ORDER`.
    """
    _check_count("m_t", m_t)
    _check_count("m_r", m_r)
    q, s = min(m_t, m_r), max(m_t, m_r)
    if q > WISHART_MAX_ORDER:
        raise FeasibilityError(
            f"Wishart expansion is limited to min(m_t, m_r) <= {WISHART_MAX_ORDER}, got {q}"
        )
    psi = [[_lower_gamma_poly(s - q + i + j - 1) for j in range(1, q + 1)] for i in range(1, q + 1)]
    norm = math.prod(math.factorial(q - k) * math.factorial(s - k) for k in range(1, q + 1))
    cdf = _determinant(psi) * Fraction(1, norm)
    return ExpPolyCcdf((1 - cdf).terms)


def _check_count(name: str, value: int) -> None:
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
