"""Acceptance criteria 1-10, each reporting one PASS/FAIL line.

The Monte Carlo criteria run 10^6 trials and carry the ``slow`` marker;
they still run under a plain ``pytest``.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from oracles import laplace_mp, negative_moment, richardson_derivative
from txcap import cli
from txcap.analytic import (
    c_alpha_m,
    capacity_for_technique,
    density_for_outage,
    k_alpha,
    k_alpha_m,
    laplace_derivative,
    outage_probability,
)
from txcap.ccdf import chi_square_ccdf, selection_ccdf, tx_selection_mrc_ccdf, wishart_max_eig_ccdf
from txcap.model import Mrc, MrtMrc, NetworkScenario, Ostbc, Sectorized, SelectionPair, SisoNakagami, TxSelectionMrc
from txcap.montecarlo import Fidelity, SimConfig, estimate_outage

ALPHAS = (2.5, 3.0, 4.0, 6.0)
REFERENCE = NetworkScenario(lam=0.0, alpha=4.0, beta=3.0, r_link=10.0, epsilon=0.05)
TRIALS = 1_000_000


def joint_z(a, b):
    var = a.p_out * (1 - a.p_out) / a.trials + b.p_out * (1 - b.p_out) / b.trials
    return (a.p_out - b.p_out) / math.sqrt(var)


@pytest.mark.slow
def test_criterion_1_rayleigh_siso(criterion):
    c = math.pi**2 / 2  # C for Rayleigh marks at alpha = 4
    zs = []
    for i, lam in enumerate((1e-5, 5e-5, 2e-4)):
        s = REFERENCE.replace(lam=lam)
        closed = 1 - math.exp(-lam * c * s.beta ** (2 / s.alpha) * s.r_link**2)
        est = estimate_outage(SimConfig(s, SisoNakagami(1), trials=TRIALS, seed=100 + i))
        zs.append(est.z_score(closed))
    criterion(1, all(abs(z) <= 3 for z in zs), "Rayleigh MC vs closed form, z = " + ", ".join(f"{z:+.2f}" for z in zs))


def test_criterion_2_ratio_limit(criterion):
    ok, last = True, []
    for alpha in ALPHAS:
        ratios = [k_alpha_m(alpha, m) / c_alpha_m(alpha, m) for m in range(1, 65)]
        ok &= all(b > a for a, b in zip(ratios, ratios[1:]))
        ok &= 0.30 <= ratios[-1] <= 0.3184
        last.append(ratios[-1])
    criterion(2, ok, "K/C increasing in m, m=64 values " + ", ".join(f"{v:.4f}" for v in last))


def test_criterion_3_khatri_two_by_two(criterion):
    expected = {(1, 0): Fraction(2), (2, 0): Fraction(-1), (1, 2): Fraction(1)}
    got = wishart_max_eig_ccdf(2, 2).terms
    criterion(3, got == expected and all(isinstance(a, Fraction) for a in got.values()), f"terms {got}")


def test_criterion_4_derivative_oracle(criterion):
    rng = np.random.default_rng(20240)
    worst = 0.0
    for _ in range(20):
        zeta = float(rng.uniform(0.5, 20.0))
        lam = float(10 ** rng.uniform(-3, -0.5))
        c = float(rng.uniform(1.0, 10.0))
        alpha = float(rng.uniform(2.2, 6.0))
        for p in range(1, 9):
            got = laplace_derivative(p, zeta, lam, c, alpha)
            ref = richardson_derivative(lambda z: laplace_mp(z, lam, c, alpha), zeta, p)
            worst = max(worst, abs(got - ref) / abs(ref))
    criterion(4, worst <= 1e-6, f"worst relative error {worst:.2e} over 20 draws, p = 1..8")


def moment_ccdfs():
    out = {}
    for m in range(1, 17):
        out[f"chi2({m})"] = chi_square_ccdf(m)
        out[f"selection({m})"] = selection_ccdf(m)
    for m_t in range(1, 5):
        for m_r in range(1, 5):
            out[f"tx_selection({m_t},{m_r})"] = tx_selection_mrc_ccdf(m_t, m_r)
            out[f"wishart({m_t},{m_r})"] = wishart_max_eig_ccdf(m_t, m_r)
    return out


def test_criterion_5_moment_identity(criterion):
    worst, where = 0.0, ""
    for name, f in moment_ccdfs().items():
        for alpha in ALPHAS:
            d = 2 / alpha
            got = math.gamma(1 - d) / k_alpha(f, alpha)
            ref = negative_moment(f.terms, d)
            err = abs(got - ref) / ref
            if err > worst:
                worst, where = err, f"{name} at alpha={alpha}"
    criterion(5, worst <= 1e-6, f"worst relative error {worst:.2e} ({where})")


GATE = [
    SisoNakagami(4),
    Sectorized(4, 0.1, 1),
    Mrc(4),
    MrtMrc(2, 2),
    SelectionPair(2, 2),
    TxSelectionMrc(2, 2),
]


@pytest.mark.slow
def test_criterion_6_cross_technique_gate(criterion):
    parts, ok = [], True
    for i, tech in enumerate(GATE):
        s = REFERENCE.replace(lam=density_for_outage(tech, REFERENCE, 0.02))
        analytic = outage_probability(tech, s)
        est = estimate_outage(SimConfig(s, tech, trials=TRIALS, seed=600 + i, fidelity=Fidelity.FULL))
        z = est.z_score(analytic)
        ok &= abs(z) <= 3
        parts.append(f"{tech.kind} {z:+.2f}")
    criterion(6, ok, "Full fidelity vs exact at outage 0.02, z: " + ", ".join(parts))


def test_criterion_7_bound_ordering(criterion):
    ok = True
    for alpha in ALPHAS:
        s = REFERENCE.replace(alpha=alpha)
        for m in range(1, 9):
            r = capacity_for_technique(Mrc(m), s)
            ok &= r.lower_bound * (1 - 1e-12) <= r.lambda_eps <= r.upper_bound * (1 + 1e-12)
            if m == 1:
                ok &= math.isclose(r.lambda_eps, r.lower_bound, rel_tol=1e-12)
    k22 = k_alpha(wishart_max_eig_ccdf(2, 2), 4.0)
    r = capacity_for_technique(MrtMrc(2, 2), REFERENCE)
    ok &= abs(k22 - 2.978) < 5e-4
    ok &= r.lower_bound <= r.lambda_eps <= r.upper_bound
    detail = f"MRC M=1..8 bracketed, equal at M=1; MRT 2x2 K={k22:.4f} in [{r.lower_bound:.3e}, {r.upper_bound:.3e}]"
    criterion(7, ok, detail)


FIG_OSTBC = NetworkScenario(lam=0.0, alpha=3.0, beta=10**0.477, r_link=10.0, epsilon=0.05)


def test_criterion_8a_ostbc_mrc_margin(criterion):
    margins = []
    for m in (2, 3, 4):
        mrc = capacity_for_technique(Mrc(m), FIG_OSTBC).lambda_eps
        ostbc = capacity_for_technique(Ostbc(m, m), FIG_OSTBC).lambda_eps
        margins.append((ostbc - mrc) / mrc)
    ok = all(0 <= g < 0.05 for g in margins)
    criterion("8a", ok, "MxM OSTBC over 1xM MRC: " + ", ".join(f"M={m} {g:+.1%}" for m, g in zip((2, 3, 4), margins)))


def test_criterion_8b_ostbc_rate_weighted(criterion):
    siso = capacity_for_technique(SisoNakagami(1), FIG_OSTBC).lambda_eps
    gaps = []
    for m in (3, 4):
        tech = Ostbc(m, 1, code_rate=0.5)
        gaps.append(tech.code_rate * capacity_for_technique(tech, FIG_OSTBC).lambda_eps / siso - 1)
    ok = all(abs(g) <= 0.10 for g in gaps)
    criterion("8b", ok, "rate-1/2 Mx1 OSTBC vs SISO: " + ", ".join(f"M={m} {g:+.1%}" for m, g in zip((3, 4), gaps)))


def test_criterion_9_determinism(criterion, tmp_path, monkeypatch, capsys):
    argv = [
        "simulate",
        *("--alpha", "4", "--beta", "3", "--r-link", "10", "--lambda", "1e-4"),
        *("--technique", "mrt_mrc", "--param", "m_t=2", "--param", "m_r=2"),
        *("--trials", "100000", "--seed", "9"),
    ]
    outputs = []
    for i, threads in enumerate(("1", "4", "1", "4")):
        monkeypatch.setenv("TXCAP_THREADS", threads)
        path = tmp_path / f"run{i}.csv"
        assert cli.main([*argv, "--csv", str(path)]) == 0
        outputs.append(path.read_bytes())
    capsys.readouterr()
    criterion(9, len(set(outputs)) == 1, "simulate CSV identical for TXCAP_THREADS=1,4 over repeated runs")


@pytest.mark.slow
def test_criterion_10_full_vs_projected(criterion):
    parts, ok = [], True
    for i, tech in enumerate((Mrc(4), MrtMrc(2, 2))):
        s = REFERENCE.replace(lam=density_for_outage(tech, REFERENCE, 0.05))
        full = estimate_outage(SimConfig(s, tech, trials=TRIALS, seed=1000 + i, fidelity=Fidelity.FULL))
        proj = estimate_outage(SimConfig(s, tech, trials=TRIALS, seed=2000 + i, fidelity=Fidelity.PROJECTED))
        z = joint_z(full, proj)
        ok &= abs(z) <= 3
        parts.append(f"{tech.kind} {full.p_out:.5f} vs {proj.p_out:.5f} (z {z:+.2f})")
    criterion(10, ok, "Full vs Projected: " + ", ".join(parts))
