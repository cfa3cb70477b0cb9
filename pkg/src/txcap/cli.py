"""txcap command line: analyze, simulate, compare and figure.

Exit status is 0 on success, 1 when the compare gate fails and 2 for
usage, parse or domain errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import figures
from .analytic import density_for_outage, exact_success_probability, signal_model, capacity_for_technique
from .errors import DomainError, FeasibilityError, ValidityError
from .model import technique_params
from .montecarlo import estimate_outage
from .scenario_file import ScenarioError, ScenarioFile, document_from_text, parse_scenario

ANALYZE_COLUMNS = [
    "technique",
    "parameters",
    "k_factor",
    "c_factor",
    "sector_gain",
    "lambda_eps",
    "lower_bound",
    "upper_bound",
    "lambda_eps_exact",
    "noise_outage",
    "transmission_capacity",
    "gain_vs_siso",
    "bounds_only",
]
SIMULATE_COLUMNS = [
    "technique",
    "parameters",
    "lambda",
    "alpha",
    "beta",
    "r_link",
    "noise_ratio",
    "fidelity",
    "pathloss_model",
    "region_radius",
    "trials",
    "seed",
    "successes",
    "p_out",
    "half_width_95",
]
COMPARE_COLUMNS = ["lambda", "analytic_outage", "mc_outage", "half_width_95", "z_score", "pass"]
Z_GATE = 3.0

# flag dest -> (section, key) in the scenario document
FLAG_KEYS = {
    "lam": ("scenario", "lambda"),
    "alpha": ("scenario", "alpha"),
    "beta": ("scenario", "beta"),
    "r_link": ("scenario", "r_link"),
    "epsilon": ("scenario", "epsilon"),
    "noise_ratio": ("scenario", "noise_ratio"),
    "technique": ("technique", "kind"),
    "trials": ("simulation", "trials"),
    "seed": ("simulation", "seed"),
    "region_radius": ("simulation", "region_radius"),
    "fidelity": ("simulation", "fidelity"),
    "pathloss_model": ("simulation", "pathloss_model"),
    "far_field": ("simulation", "far_field"),
    "lambda_grid": ("simulation", "lambda_grid"),
    "outage_grid": ("simulation", "outage_grid"),
}


class UsageError(Exception):
    pass


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    if str(path) == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def _param_text(tech) -> str:
    return ";".join(f"{k}={fmt(v)}" for k, v in technique_params(tech).items() if v is not None)


def _load(args) -> ScenarioFile:
    doc: dict[str, dict[str, str]] = {}
    if args.scenario_file:
        try:
            text = Path(args.scenario_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {args.scenario_file}: {exc.strerror}") from None
        doc = document_from_text(text, source=args.scenario_file)
    for dest, (section, key) in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            doc.setdefault(section, {})[key] = value
    for item in args.param or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        doc.setdefault("technique", {})[key.strip()] = value.strip()
    return parse_scenario(doc)


# ---------------------------------------------------------------- commands


def cmd_analyze(args) -> int:
    sf = _load(args)
    r = capacity_for_technique(sf.technique, sf.scenario)
    tc = r.transmission_capacity(args.rate)
    fields = [
        ("technique", f"{sf.technique.kind} ({_param_text(sf.technique)})"),
        ("k_factor", r.k_factor),
        ("c_factor", r.c_factor),
        ("sector_gain", r.sector_gain),
        ("lambda_eps", r.lambda_eps),
        ("lower_bound", r.lower_bound),
        ("upper_bound", r.upper_bound),
        ("lambda_eps_exact", r.lambda_eps_exact),
        ("noise_outage", r.noise_outage),
        ("transmission_capacity", tc),
        ("gain_vs_siso", r.gain_vs_siso),
    ]
    for name, value in fields:
        print(f"{name:<22} {fmt(value) if value is not None else '-'}")
    if r.bounds_only:
        print(f"{'status':<22} bounds-only: no exact K, lambda_eps is the midpoint of the bounds")
    if args.csv:
        row = [
            sf.technique.kind,
            _param_text(sf.technique),
            r.k_factor,
            r.c_factor,
            r.sector_gain,
            r.lambda_eps,
            r.lower_bound,
            r.upper_bound,
            r.lambda_eps_exact,
            r.noise_outage,
            tc,
            r.gain_vs_siso,
            r.bounds_only,
        ]
        write_csv(args.csv, ANALYZE_COLUMNS, [row])
    return 0


def cmd_simulate(args) -> int:
    sf = _load(args)
    cfg = sf.sim_config()
    est = estimate_outage(cfg, trace=args.trace)
    s = sf.scenario
    print(f"{'p_out':<14} {fmt(est.p_out)}")
    print(f"{'half_width_95':<14} {fmt(est.half_width_95)}")
    print(f"{'trials':<14} {est.trials}")
    print(f"{'seed':<14} {est.seed}")
    print(f"{'region_radius':<14} {fmt(cfg.radius)}")
    if args.csv:
        row = [
            sf.technique.kind,
            _param_text(sf.technique),
            s.lam,
            s.alpha,
            s.beta,
            s.r_link,
            s.noise_ratio,
            cfg.fidelity.value,
            cfg.pathloss_model.value,
            cfg.radius,
            est.trials,
            est.seed,
            est.successes,
            est.p_out,
            est.half_width_95,
        ]
        write_csv(args.csv, SIMULATE_COLUMNS, [row])
    return 0


def cmd_compare(args) -> int:
    sf = _load(args)
    lams = list(sf.lambda_grid)
    lams += [density_for_outage(sf.technique, sf.scenario, p) for p in sf.outage_grid]
    if not lams:
        raise UsageError("compare needs a non-empty lambda_grid or outage_grid")
    model = signal_model(sf.technique, sf.scenario.alpha)
    if model.ccdf is None:
        raise FeasibilityError(f"no exact outage available for {sf.technique!r}")
    noise = sf.scenario.noise_ratio * model.noise_scale
    rows = []
    ok = True
    print(f"{'lambda':>14} {'analytic':>12} {'monte_carlo':>12} {'hw95':>10} {'z':>8}")
    for i, lam in enumerate(lams):
        s = sf.scenario.replace(lam=lam)
        analytic = 1.0 - exact_success_probability(model.ccdf, s, model.c_over * args.c_scale, noise_ratio=noise)
        est = estimate_outage(sf.sim_config(scenario=s, seed=(sf.seed + i) % 2**64))
        z = est.z_score(analytic)
        passed = abs(z) <= Z_GATE
        ok &= passed
        rows.append([lam, analytic, est.p_out, est.half_width_95, z, passed])
        print(f"{lam:>14.6g} {analytic:>12.6g} {est.p_out:>12.6g} {est.half_width_95:>10.3g} {z:>8.3f}")
    print("gate", "pass" if ok else "FAIL", f"(|z| <= {Z_GATE:g} at every point)")
    if args.csv:
        write_csv(args.csv, COMPARE_COLUMNS, rows)
    return 0 if ok else 1


PLOT_STUB = '''"""Plot {name}.csv (generated stub; edit as needed)."""
import csv
import matplotlib.pyplot as plt

with open("{name}.csv") as fh:
    rows = list(csv.DictReader(fh))
x = "{x}"
for col in {ys!r}:
    plt.plot([float(r[x]) for r in rows], [float(r[col]) if r[col] else float("nan") for r in rows], label=col)
plt.xlabel(x)
plt.legend()
plt.savefig("{name}.png", dpi=150)
'''


def cmd_figure(args) -> int:
    try:
        config = figures.load_figure_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc.strerror}") from None
    header, rows = figures.figure_rows(args.name, config)
    if args.output:
        target = args.output
    else:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / f"{args.name}.csv"
    write_csv(target, header, rows)
    if str(target) != "-":
        print(target)
    if args.plot_script:
        stub = Path(target).with_name(f"plot_{args.name}.py") if str(target) != "-" else Path(f"plot_{args.name}.py")
        stub.write_text(PLOT_STUB.format(name=args.name, x=header[1], ys=header[2:]), encoding="utf-8")
        print(stub)
    return 0


# ---------------------------------------------------------------- parser


def _scenario_flags(p: argparse.ArgumentParser, simulation: bool) -> None:
    p.add_argument("scenario_file", nargs="?", help="scenario file (flags override its values)")
    g = p.add_argument_group("scenario")
    g.add_argument("--lambda", dest="lam", metavar="DENSITY", help="transmitter density")
    g.add_argument("--alpha", help="path-loss exponent (> 2)")
    g.add_argument("--beta", help="target SINR, linear")
    g.add_argument("--r-link", dest="r_link", help="transmitter-receiver distance")
    g.add_argument("--epsilon", help="outage budget")
    g.add_argument("--noise-ratio", dest="noise_ratio", help="noise over transmit power")
    g.add_argument("--technique", metavar="KIND", help="technique kind, e.g. mrc")
    g.add_argument("--param", action="append", metavar="KEY=VALUE", help="technique field (repeatable)")
    if simulation:
        g = p.add_argument_group("simulation")
        g.add_argument("--trials")
        g.add_argument("--seed")
        g.add_argument("--region-radius", dest="region_radius", help="disk radius or 'auto'")
        g.add_argument("--fidelity", help="Full or Projected")
        g.add_argument("--pathloss-model", dest="pathloss_model", help="Pure or Bounded")
        g.add_argument("--far-field", dest="far_field", help="mean or none")
    p.add_argument("--csv", metavar="PATH", help="also write CSV ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="txcap", description="Transmission capacity of random-access MIMO ad hoc networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="closed-form K, C, optimal density and bounds")
    _scenario_flags(p, simulation=False)
    p.add_argument("--rate", type=float, default=1.0, help="rate factor b in b(1-eps)lambda_eps (default 1)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo outage estimate")
    _scenario_flags(p, simulation=True)
    p.add_argument("--trace", metavar="PATH", help="write per-trial (trial, sinr, success) CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="analytic vs Monte Carlo outage over a density grid")
    _scenario_flags(p, simulation=True)
    p.add_argument("--lambda-grid", dest="lambda_grid", help="comma-separated densities")
    p.add_argument("--outage-grid", dest="outage_grid", help="comma-separated target outages")
    p.add_argument("--c-scale", dest="c_scale", type=float, default=1.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("figure", help="write the data of a comparison figure as CSV")
    p.add_argument("name", choices=sorted(figures.FIGURES))
    p.add_argument("--config", help="figure parameter file (default: bundled)")
    p.add_argument("--out-dir", default=".", help="directory for <name>.csv")
    p.add_argument("-o", "--output", help="output file ('-' for stdout)")
    p.add_argument("--plot-script", action="store_true", help="also write a matplotlib script stub")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ScenarioError, DomainError, ValidityError, FeasibilityError) as exc:
        print(f"txcap: error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
