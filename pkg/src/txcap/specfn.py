"""Special functions and small combinatorial enumerators.

Everything here is pure and cheap; the enumerators return lists because the
sizes involved (derivative orders up to 16, a handful of antennas) are tiny.
"""

from __future__ import annotations

import itertools
import math

__all__ = [
    "gamma",
    "beta",
    "lower_incomplete_gamma_int",
    "integer_compositions",
    "subsets_of_size",
]


def gamma(t: float) -> float:
    """Gamma function for positive real ``t``.

    ``math.gamma`` is accurate to a few ulp over the positive axis, well past
    the 12 significant digits the capacity formulas need.
    """
    if not t > 0 or math.isinf(t):
        raise ValueError(f"gamma requires a finite t > 0, got {t!r}")
    return math.gamma(t)


def beta(a: float, b: float) -> float:
    """Beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b)."""
    if not (a > 0 and b > 0):
        raise ValueError(f"beta requires a, b > 0, got ({a!r}, {b!r})")
    if a + b < 170.0:
        return math.gamma(a) * math.gamma(b) / math.gamma(a + b)
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def lower_incomplete_gamma_int(n: int, x: float) -> float:
    """Lower incomplete gamma γ(n, x) for integer order n ≥ 1.

    Uses γ(n, x) = (n-1)! (1 - e^{-x} Σ_{k<n} x^k/k!).  For x below n the
    bracket is evaluated as the equivalent tail e^{-x} Σ_{k≥n} x^k/k!, which
    avoids the cancellation of ``1 - (almost 1)``.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"order must be an integer >= 1, got {n!r}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x!r}")
    n = int(n)
    if x == 0:
        return 0.0
    if x < n:
        term = math.exp(-x) * x**n / math.factorial(n)
        tail = 0.0
        k = n
        while term > 1e-17 * tail:
            tail += term
            k += 1
            term *= x / k
        bracket = tail
    else:
        term = 1.0
        partial = 1.0
        for k in range(1, n):
            term *= x / k
            partial += term
        bracket = -math.expm1(-x) if n == 1 else 1.0 - math.exp(-x) * partial
    return math.factorial(n - 1) * bracket


def integer_compositions(k: int, m: int, cap: int) -> list[tuple[int, ...]]:
    """All ordered m-tuples of integers in [0, cap] summing to k.

    >>> integer_compositions(2, 2, 2)
    [(0, 2), (1, 1), (2, 0)]
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    out: list[tuple[int, ...]] = []

    def extend(prefix: tuple[int, ...], remaining: int, slots: int) -> None:
        if slots == 1:
            if remaining <= cap:
                out.append(prefix + (remaining,))
            return
        # the remaining slots - 1 entries can absorb at most cap each
        lo = max(0, remaining - cap * (slots - 1))
        for first in range(lo, min(cap, remaining) + 1):
            extend(prefix + (first,), remaining - first, slots - 1)

    if 0 <= k <= cap * m:
        extend((), k, m)
    return out


def subsets_of_size(a: int, b: int) -> list[tuple[int, ...]]:
    """All b-element subsets of {1, ..., a}, each sorted increasingly."""
    if a < 0 or b < 0:
        raise ValueError("a and b must be nonnegative")
    if b > a:
        raise ValueError(f"cannot choose {b} elements from {a}")
    return list(itertools.combinations(range(1, a + 1), b))
