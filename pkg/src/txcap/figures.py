"""Curve data for the standard comparison figures.

Each figure is a function of its parameter section (with [defaults]
inherited) that returns a header and rows.  Parameters come from the
bundled data/figures.ini unless another file is given.
"""

from __future__ import annotations

import configparser
from importlib import resources

import numpy as np

from .analytic import c_alpha_m, capacity_for_technique, k_alpha, k_alpha_m
from .ccdf import selection_ccdf, wishart_max_eig_ccdf
from .model import Mrc, MrtMrc, NetworkScenario, Ostbc, SelectionPair

__all__ = ["FIGURES", "HEADERS", "figure_rows", "load_figure_config"]


def load_figure_config(path=None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), default_section="defaults", interpolation=None)
    if path is None:
        cp.read_string(resources.files("txcap").joinpath("data/figures.ini").read_text(encoding="utf-8"))
    else:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    return cp


def _floats(sec, key):
    return [float(v) for v in sec[key].split(",") if v.strip()]


def _scenario(sec, alpha=None) -> NetworkScenario:
    return NetworkScenario(
        lam=0.0,
        alpha=float(sec["alpha"]) if alpha is None else alpha,
        beta=float(sec["beta"]),
        r_link=float(sec["r_link"]),
        epsilon=float(sec["epsilon"]),
    )


def ratio_vs_m(sec):
    rows = []
    for alpha in _floats(sec, "alphas"):
        for m in range(1, int(sec["m_max"]) + 1):
            k, c = k_alpha_m(alpha, m), c_alpha_m(alpha, m)
            rows.append([alpha, m, k, c, k / c])
    return rows


def tc_vs_M_mrc(sec):
    rows = []
    for alpha in _floats(sec, "alphas"):
        s = _scenario(sec, alpha)
        for m in range(1, int(sec["antennas_max"]) + 1):
            r = capacity_for_technique(Mrc(m), s)
            rows.append([alpha, m, r.lambda_eps, r.transmission_capacity()])
    return rows


def k_vs_M_mrc(sec):
    rows = []
    for alpha in _floats(sec, "alphas"):
        for m in range(1, int(sec["antennas_max"]) + 1):
            rows.append([alpha, m, k_alpha_m(alpha, m)])
    return rows


def mrc_bounds(sec):
    rows = []
    for alpha in _floats(sec, "alphas"):
        s = _scenario(sec, alpha)
        for m in range(1, int(sec["antennas_max"]) + 1):
            r = capacity_for_technique(Mrc(m), s)
            rows.append([alpha, m, r.lambda_eps, r.lower_bound, r.upper_bound])
    return rows


def k_vs_alpha(sec):
    m = int(sec["antennas"])
    lo, hi, step = float(sec["alpha_min"]), float(sec["alpha_max"]), float(sec["alpha_step"])
    count = int(round((hi - lo) / step)) + 1
    mrt = wishart_max_eig_ccdf(m, m)
    sc = selection_ccdf(m)
    rows = []
    for alpha in np.round(lo + step * np.arange(count), 10):
        alpha = float(alpha)
        ostbc = k_alpha_m(alpha, m) / c_alpha_m(alpha, m) * c_alpha_m(alpha, 1)
        rows.append([m, alpha, k_alpha(mrt, alpha), k_alpha_m(alpha, m), k_alpha(sc, alpha), ostbc])
    return rows


def _ostbc(m_t, m_r, sec):
    rate = float(sec["ostbc_large_code_rate"]) if m_t > 2 else 1.0
    return Ostbc(m_t, m_r, code_rate=rate)


def ostbc_compare(sec):
    s = _scenario(sec)
    rows = []
    for m in range(1, int(sec["antennas_max"]) + 1):
        mrc = capacity_for_technique(Mrc(m), s).lambda_eps
        mx1 = capacity_for_technique(_ostbc(m, 1, sec), s)
        mxm = capacity_for_technique(_ostbc(m, m, sec), s)
        rate = mx1.technique.code_rate
        rows.append([m, mrc, mx1.lambda_eps, mxm.lambda_eps, rate, rate * mx1.lambda_eps, rate * mxm.lambda_eps])
    return rows


def technique_compare(sec):
    s = _scenario(sec)
    rows = []
    for m in range(1, int(sec["antennas_max"]) + 1):
        row = [m]
        for tech in (MrtMrc(m, m), Mrc(m), _ostbc(m, m, sec), SelectionPair(m, m)):
            row.append(capacity_for_technique(tech, s).transmission_capacity())
        rows.append(row)
    return rows


HEADERS = {
    "ratio_vs_m": ["alpha", "m", "k_factor", "c_factor", "ratio"],
    "tc_vs_M_mrc": ["alpha", "antennas", "lambda_eps", "transmission_capacity"],
    "k_vs_M_mrc": ["alpha", "antennas", "k_factor"],
    "mrc_bounds": ["alpha", "antennas", "lambda_eps", "lower_bound", "upper_bound"],
    "k_vs_alpha": ["antennas", "alpha", "k_mrt_mrc", "k_mrc", "k_selection", "k_ostbc_normalized"],
    "ostbc_compare": [
        "antennas",
        "mrc_1xM",
        "ostbc_Mx1",
        "ostbc_MxM",
        "code_rate",
        "ostbc_Mx1_rate_weighted",
        "ostbc_MxM_rate_weighted",
    ],
    "technique_compare": ["antennas", "mrt_mrc", "mrc", "ostbc_mrc", "selection_pair"],
}

FIGURES = {
    "ratio_vs_m": ratio_vs_m,
    "tc_vs_M_mrc": tc_vs_M_mrc,
    "k_vs_M_mrc": k_vs_M_mrc,
    "mrc_bounds": mrc_bounds,
    "k_vs_alpha": k_vs_alpha,
    "ostbc_compare": ostbc_compare,
    "technique_compare": technique_compare,
}


def figure_rows(name: str, config: configparser.ConfigParser | None = None):
    """(header, rows) for figure ``name``."""
    if config is None:
        config = load_figure_config()
    sec = config[name] if config.has_section(name) else config[config.default_section]
    return HEADERS[name], FIGURES[name](sec)
