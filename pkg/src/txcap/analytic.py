"""Closed-form outage and optimal contention density.

The interference seen by the typical receiver is Poisson shot noise whose
Laplace transform is exp(-λ c ζ^{2/α}).  When the signal CCDF is an
exponential polynomial Σ a_nk e^{-n x} x^k, the success probability is a
finite combination of derivatives of that transform, and its first-order
behaviour in λ gives the K factor of the density formula
λ_ε ≈ K ε / (C β^{2/α} R²).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from scipy.optimize import brentq

from .ccdf import (
    WISHART_MAX_ORDER,
    ExpPolyCcdf,
    chi_square_ccdf,
    selection_ccdf,
    tx_selection_mrc_ccdf,
    wishart_max_eig_ccdf,
)
from .errors import DomainError, FeasibilityError, ValidityError
from .model import (
    Mrc,
    MrtMrc,
    NetworkScenario,
    Ostbc,
    Sectorized,
    SelectionPair,
    SisoNakagami,
    TechniqueSpec,
    TxSelectionMrc,
)
from .specfn import beta as beta_fn
from .specfn import gamma, subsets_of_size

__all__ = [
    "MAX_DERIVATIVE_ORDER",
    "c_alpha_m",
    "k_alpha",
    "k_alpha_m",
    "upsilon",
    "laplace_value",
    "laplace_derivative",
    "exact_success_probability",
    "SignalModel",
    "signal_model",
    "CapacityResult",
    "capacity_for_technique",
    "mixed_nakagami_density",
    "success_probability",
    "outage_probability",
    "density_for_outage",
    "sector_gain",
]

MAX_DERIVATIVE_ORDER = 16


def _check_alpha(alpha: float) -> float:
    if not alpha > 2:
        raise DomainError(f"path-loss exponent must exceed 2, got {alpha}")
    return 2.0 / alpha


def _falling(k: int, delta: float) -> float:
    # Π_{l=0}^{k-1} (l - δ)
    out = 1.0
    for l in range(k):
        out *= l - delta
    return out


def c_alpha_m(alpha: float, m: int) -> float:
    """Interference constant for Gamma(m, 1) power marks.

    (2π/α) Σ_{k<m} C(m,k) B(2/α + k, m - 2/α - k); m = 1 gives the Rayleigh
    value (2π/α) Γ(2/α) Γ(1 - 2/α).
    """
    delta = _check_alpha(alpha)
    if int(m) != m or m < 1:
        raise DomainError(f"m must be an integer >= 1, got {m!r}")
    total = sum(math.comb(m, k) * beta_fn(delta + k, m - delta - k) for k in range(m))
    return 2.0 * math.pi / alpha * total


def k_alpha(ccdf: ExpPolyCcdf, alpha: float, noise_ratio: float = 0.0, beta_r: float | None = None) -> float:
    """Signal factor K for an exponential-polynomial signal CCDF.

    Without noise this is [Σ a_nk n^{2/α-k} Π_{l<k}(l - 2/α)]^{-1}.  With
    noise ν = ``noise_ratio`` the first-order coefficient in λ picks up the
    binomial noise terms, in which ν always appears multiplied by the
    Laplace argument ``beta_r`` = β R^α:

        Σ a_nk e^{-n β_r ν} Σ_j C(k,j) (β_r ν)^{k-j} n^{2/α-j} Π_{l<j}(l - 2/α)
    """
    delta = _check_alpha(alpha)
    if noise_ratio < 0:
        raise DomainError("noise_ratio must be nonnegative")
    if noise_ratio > 0 and beta_r is None:
        raise DomainError("beta_r (= beta * r_link**alpha) is required when noise_ratio > 0")
    total = 0.0
    if noise_ratio == 0:
        for (n, k), a in ccdf.items():
            total += float(a) * n ** (delta - k) * _falling(k, delta)
    else:
        u = beta_r * noise_ratio
        for (n, k), a in ccdf.items():
            inner = sum(
                math.comb(k, j) * u ** (k - j) * n ** (delta - j) * _falling(j, delta) for j in range(k + 1)
            )
            total += float(a) * math.exp(-n * u) * inner
    if not total > 0:
        raise ValidityError(f"K factor is not positive (inverse sum {total:.6g}); invalid CCDF or regime")
    return 1.0 / total


def k_alpha_m(alpha: float, m: int) -> float:
    """K for the χ² (sum of m exponentials) signal, the MRC/Nakagami factor."""
    delta = _check_alpha(alpha)
    total = 1.0
    term = 1.0
    for k in range(1, m):
        term *= (k - 1 - delta) / k
        total += term
    return 1.0 / total


_UPSILON: dict[tuple[int, float], tuple[float, ...]] = {}
_UPSILON_LOCK = threading.Lock()


def upsilon(p: int, alpha: float) -> tuple[float, ...]:
    """Coefficients (Υ_{p,1}, ..., Υ_{p,p}) of the p-th Laplace derivative.

    Υ_{p,k} sums, over the (p-k)-subsets δ of {1, ..., p-1}, the product of
    (2/α)(l_i - i + 1) - l_i over the sorted elements l_1 < l_2 < ... of δ.
    Cached per (p, α).
    """
    key = (p, float(alpha))
    cached = _UPSILON.get(key)
    if cached is not None:
        return cached
    with _UPSILON_LOCK:
        cached = _UPSILON.get(key)
        if cached is None:
            delta = 2.0 / alpha
            coeffs = []
            for k in range(1, p + 1):
                acc = 0.0
                for subset in subsets_of_size(p - 1, p - k):
                    prod = 1.0
                    for i, l in enumerate(subset, start=1):
                        prod *= delta * (l - i + 1) - l
                    acc += prod
                coeffs.append(acc)
            cached = tuple(coeffs)
            _UPSILON[key] = cached
    return cached


def laplace_value(zeta: float, lam: float, c_over: float, alpha: float) -> float:
    """exp(-λ c ζ^{2/α})."""
    delta = _check_alpha(alpha)
    if zeta < 0 or lam < 0:
        raise DomainError("zeta and lambda must be nonnegative")
    return math.exp(-lam * c_over * zeta**delta)


def _scaled_derivative_sum(p: int, kappa: float, alpha: float) -> float:
    # ζ^p e^{κ} d^p/dζ^p e^{-κ(ζ)} with κ = λ c ζ^{2/α}: Σ_k (-κ 2/α)^k Υ_{p,k}
    if p == 0:
        return 1.0
    delta = 2.0 / alpha
    ups = upsilon(p, alpha)
    return sum((-kappa * delta) ** k * ups[k - 1] for k in range(1, p + 1))


def laplace_derivative(p: int, zeta: float, lam: float, c_over: float, alpha: float) -> float:
    """p-th derivative in ζ of exp(-λ c ζ^{2/α}).

        d^p/dζ^p L = L(ζ) ζ^{-p} Σ_{k=1}^p (-λ c ζ^{2/α} 2/α)^k Υ_{p,k}
    """
    _check_alpha(alpha)
    if int(p) != p or p < 0:
        raise DomainError(f"derivative order must be a nonnegative integer, got {p!r}")
    if p > MAX_DERIVATIVE_ORDER:
        raise FeasibilityError(f"derivative order {p} exceeds the supported maximum {MAX_DERIVATIVE_ORDER}")
    if p == 0:
        return laplace_value(zeta, lam, c_over, alpha)
    if not zeta > 0:
        raise DomainError("derivatives need zeta > 0")
    kappa = lam * c_over * zeta ** (2.0 / alpha)
    return math.exp(-kappa) * zeta ** (-p) * _scaled_derivative_sum(p, kappa, alpha)


def exact_success_probability(
    ccdf: ExpPolyCcdf, scenario: NetworkScenario, c_over: float, noise_ratio: float | None = None
) -> float:
    """P(SINR >= β) for a signal with CCDF ``ccdf`` amid shot noise exp(-λ c ζ^{2/α}).

    Each term a_nk contributes a_nk (-ζ/n)^k d^k/dζ^k [L_I(ζ) e^{-ν ζ}] at
    ζ = n β R^α.  Everything is evaluated in dimensionless form so that large
    β R^α does not overflow.  ``noise_ratio`` overrides the scenario value
    (it must already be expressed in the units of the signal CCDF).
    """
    alpha = scenario.alpha
    delta = _check_alpha(alpha)
    nu = scenario.noise_ratio if noise_ratio is None else noise_ratio
    zeta0 = scenario.beta_r
    u = zeta0 * nu
    lam = scenario.lam
    if ccdf.max_power() > MAX_DERIVATIVE_ORDER:
        raise FeasibilityError(
            f"signal CCDF has power {ccdf.max_power()} > supported derivative order {MAX_DERIVATIVE_ORDER}"
        )
    total = 0.0
    for (n, k), a in ccdf.items():
        kappa = lam * c_over * (n * zeta0) ** delta
        base = math.exp(-kappa - n * u)
        if base == 0.0:
            continue
        inner = 0.0
        for j in range(k + 1):
            inner += math.comb(k, j) * u ** (k - j) * (-1.0 / n) ** j * _scaled_derivative_sum(j, kappa, alpha)
        total += float(a) * base * inner
    return min(1.0, max(0.0, total))


def sector_gain(tech: Sectorized, alpha: float) -> float:
    """(M / (1 + γ^{2/α}(M-1)))², the density gain of static sectorization."""
    delta = _check_alpha(alpha)
    M = tech.sectors
    return (M / (1.0 + tech.gamma_sidelobe**delta * (M - 1))) ** 2


@dataclass(frozen=True)
class SignalModel:
    """How a technique maps onto the generic shot-noise formulation.

    ``ccdf`` is the signal CCDF in the units used by ``c_factor`` (None when
    no exact expansion is available); thermal noise enters the generic
    formulas as ``noise_scale * noise_ratio``.
    """

    ccdf: ExpPolyCcdf | None
    c_factor: float
    sector_gain: float = 1.0
    noise_scale: float = 1.0

    @property
    def c_over(self) -> float:
        return self.c_factor / self.sector_gain


def signal_model(tech: TechniqueSpec, alpha: float) -> SignalModel:
    """Signal CCDF and interference constant for ``tech``.

    Nakagami signals and marks are represented as Gamma(m, 1) (mean m) so
    that C_{α,m} applies directly; noise is rescaled to match.  OSTBC uses a
    Gamma(N_r, 1) interference mark, the independence approximation.
    """
    _check_alpha(alpha)
    c1 = c_alpha_m(alpha, 1)
    if isinstance(tech, SisoNakagami):
        return SignalModel(chi_square_ccdf(tech.m), c_alpha_m(alpha, tech.m), noise_scale=tech.m)
    if isinstance(tech, Sectorized):
        gain = sector_gain(tech, alpha)
        return SignalModel(
            chi_square_ccdf(tech.m),
            c_alpha_m(alpha, tech.m),
            sector_gain=gain,
            noise_scale=tech.m / tech.main_gain**2,
        )
    if isinstance(tech, Mrc):
        return SignalModel(chi_square_ccdf(tech.antennas), c1)
    if isinstance(tech, MrtMrc):
        if min(tech.m_t, tech.m_r) > WISHART_MAX_ORDER:
            return SignalModel(None, c1)
        return SignalModel(wishart_max_eig_ccdf(tech.m_t, tech.m_r), c1)
    if isinstance(tech, Ostbc):
        return SignalModel(chi_square_ccdf(tech.m_t * tech.m_r), c_alpha_m(alpha, tech.n_r), noise_scale=tech.m_t)
    if isinstance(tech, SelectionPair):
        return SignalModel(selection_ccdf(tech.m_t * tech.m_r), c1)
    if isinstance(tech, TxSelectionMrc):
        return SignalModel(tx_selection_mrc_ccdf(tech.m_t, tech.m_r), c1)
    raise TypeError(f"not a technique: {tech!r}")


@dataclass(frozen=True)
class CapacityResult:
    """Small-outage density and its bounds for one technique and scenario.

    ``lambda_eps`` is the linearized density K ε/(C β^{2/α} R²) times the
    sector gain; ``lambda_eps_exact`` solves P(outage) = ε on the exact
    outage curve.  ``bounds_only`` marks results where no exact K exists and
    ``lambda_eps`` is the midpoint of the bounds.
    """

    technique: TechniqueSpec
    k_factor: float | None
    c_factor: float
    sector_gain: float
    lambda_eps: float
    lower_bound: float | None
    upper_bound: float | None
    lambda_eps_exact: float | None
    gain_vs_siso: float
    epsilon: float
    noise_outage: float = 0.0
    bounds_only: bool = False

    def transmission_capacity(self, rate: float = 1.0) -> float:
        """b (1 - ε) λ_ε, with b = ``rate`` times the OSTBC code rate when one is set."""
        code_rate = getattr(self.technique, "code_rate", None)
        if code_rate is not None:
            rate *= code_rate
        return rate * (1.0 - self.epsilon) * self.lambda_eps


def _bounds(tech: TechniqueSpec, alpha: float, scale: float) -> tuple[float | None, float | None]:
    """Density bounds (already multiplied by ε/(β^{2/α} R²) via ``scale``)."""
    delta = 2.0 / alpha
    g = gamma(1.0 - delta)
    c1 = c_alpha_m(alpha, 1)
    if isinstance(tech, SisoNakagami):
        cm = c_alpha_m(alpha, tech.m)
        return tech.m**delta * scale / cm, g * tech.m**delta * scale / cm
    if isinstance(tech, Sectorized):
        base = k_alpha_m(alpha, tech.m) / c_alpha_m(alpha, tech.m) * scale
        upper = math.inf if tech.gamma_sidelobe == 0 else base * tech.gamma_sidelobe ** (-2.0 * delta)
        return base, upper
    if isinstance(tech, Mrc):
        return tech.antennas**delta * scale / c1, g * tech.antennas**delta * scale / c1
    if isinstance(tech, MrtMrc):
        return (
            max(tech.m_t, tech.m_r) ** delta * scale / c1,
            g * (tech.m_t * tech.m_r) ** delta * scale / c1,
        )
    if isinstance(tech, Ostbc):
        # K_M <= Γ(1-δ) M^δ and C_{α,N} >= C_{α,1} N^δ give the upper bound;
        # C_{α,N} <= π Γ(1-δ) N^δ gives the general lower bound, which the
        # sharper M_r^δ / C_{α,1} replaces in the usual case N_r = M_t.
        ratio = tech.m_t * tech.m_r / tech.n_r
        lower = ratio**delta * scale / (math.pi * g)
        if tech.n_r == tech.m_t:
            lower = tech.m_r**delta * scale / c1
        return lower, g * ratio**delta * scale / c1
    return None, None


def success_probability(tech: TechniqueSpec, scenario: NetworkScenario) -> float:
    """Exact P(SINR >= β) for ``tech`` (requires an exact signal CCDF)."""
    model = signal_model(tech, scenario.alpha)
    if model.ccdf is None:
        raise FeasibilityError(f"no exact signal distribution available for {tech!r}")
    return exact_success_probability(
        model.ccdf, scenario, model.c_over, noise_ratio=scenario.noise_ratio * model.noise_scale
    )


def outage_probability(tech: TechniqueSpec, scenario: NetworkScenario) -> float:
    return 1.0 - success_probability(tech, scenario)


def density_for_outage(tech: TechniqueSpec, scenario: NetworkScenario, target: float) -> float:
    """Density λ at which the exact outage equals ``target``."""
    if not 0 < target < 1:
        raise DomainError("target outage must lie in (0, 1)")
    floor = outage_probability(tech, scenario.replace(lam=0.0))
    if target <= floor:
        raise ValidityError(f"noise alone already causes outage {floor:.4g} >= target {target}")

    def excess(lam: float) -> float:
        return outage_probability(tech, scenario.replace(lam=lam)) - target

    hi = 1.0 / (c_alpha_m(scenario.alpha, 1) * scenario.beta ** scenario.delta * scenario.r_link**2)
    while excess(hi) < 0:
        hi *= 2.0
    return brentq(excess, 0.0, hi, xtol=1e-15 * hi, rtol=1e-13, maxiter=200)


def capacity_for_technique(tech: TechniqueSpec, scenario: NetworkScenario) -> CapacityResult:
    """K, C, λ_ε and the published bounds for one technique."""
    alpha = scenario.alpha
    delta = scenario.delta
    model = signal_model(tech, alpha)
    noise = scenario.noise_ratio * model.noise_scale
    area = scenario.beta**delta * scenario.r_link**2
    c1 = c_alpha_m(alpha, 1)

    noise_outage = 0.0
    if model.ccdf is not None and noise > 0:
        noise_outage = 1.0 - float(model.ccdf.evaluate(scenario.beta_r * noise))
        if noise_outage >= scenario.epsilon:
            raise ValidityError(
                f"noise alone causes outage {noise_outage:.4g} >= epsilon {scenario.epsilon}"
            )
    budget = scenario.epsilon - noise_outage

    if model.ccdf is None:
        lower, upper = _bounds(tech, alpha, scenario.epsilon / area)
        k = None
        lam_eps = 0.5 * (lower + upper)
        lam_exact = None
        bounds_only = True
    else:
        k = k_alpha(model.ccdf, alpha, noise, scenario.beta_r)
        lam_eps = model.sector_gain * k * budget / (model.c_factor * area)
        try:
            lam_exact = density_for_outage(tech, scenario, scenario.epsilon)
        except FeasibilityError:
            lam_exact = None
        if noise == 0:
            lower, upper = _bounds(tech, alpha, scenario.epsilon / area)
        else:
            lower, upper = None, None
        bounds_only = False

    siso = scenario.epsilon / (c1 * area)
    return CapacityResult(
        technique=tech,
        k_factor=k,
        c_factor=model.c_factor,
        sector_gain=model.sector_gain,
        lambda_eps=lam_eps,
        lower_bound=lower,
        upper_bound=upper,
        lambda_eps_exact=lam_exact,
        gain_vs_siso=lam_eps / siso,
        epsilon=scenario.epsilon,
        noise_outage=noise_outage,
        bounds_only=bounds_only,
    )


def mixed_nakagami_density(m_o: int, m_i: int, scenario: NetworkScenario) -> float:
    """Density when the desired link is Nakagami-m_o and interferers Nakagami-m_i.

        λ̄_ε = m_i^{2/α} K_{α,m_o} ε / (m_o^{2/α} C_{α,m_i} β^{2/α} R²)
    """
    delta = scenario.delta
    for name, value in (("m_o", m_o), ("m_i", m_i)):
        if int(value) != value or value < 1:
            raise DomainError(f"{name} must be an integer >= 1, got {value!r}")
    return (
        m_i**delta
        * k_alpha_m(scenario.alpha, m_o)
        * scenario.epsilon
        / (m_o**delta * c_alpha_m(scenario.alpha, m_i) * scenario.beta**delta * scenario.r_link**2)
    )
