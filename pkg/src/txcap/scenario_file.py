"""Scenario files: a small INI dialect read with configparser.

    # '#' starts a comment, also after a value
    [scenario]
    lambda = 5.85e-5        # density; optional, default 0
    alpha = 4
    beta = 3
    r_link = 10
    epsilon = 0.05          # optional
    noise_ratio = 0         # optional

    [technique]
    kind = mrc              # siso_nakagami | sectorized | mrc | mrt_mrc | ostbc
    antennas = 4            #   | selection_pair | tx_selection_mrc, plus its fields

    [simulation]            # optional section
    trials = 100000
    seed = 1
    region_radius = auto
    fidelity = Full         # Full | Projected
    pathloss_model = Pure   # Pure | Bounded
    far_field = mean        # mean | none
    lambda_grid = 1e-5, 2e-5    # densities for `compare`
    outage_grid = 0.02          # or target outages, solved for the density

Keys mirror the Python field names except ``lambda`` (``lam`` in Python,
since ``lambda`` is reserved).  Unknown sections and keys are errors.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field

from .errors import DomainError
from .model import TECHNIQUES, NetworkScenario, TechniqueSpec, technique_from_params, technique_params
from .montecarlo import FarField, Fidelity, PathlossModel, SimConfig

__all__ = ["ScenarioError", "ScenarioFile", "parse_scenario", "load_scenario", "document_from_text"]

SCENARIO_KEYS = {"lambda": 0.0, "alpha": None, "beta": None, "r_link": None, "epsilon": 0.05, "noise_ratio": 0.0}
SIMULATION_DEFAULTS = {
    "trials": "100000",
    "seed": "0",
    "region_radius": "auto",
    "fidelity": Fidelity.FULL.value,
    "pathloss_model": PathlossModel.PURE.value,
    "far_field": FarField.MEAN.value,
    "lambda_grid": "",
    "outage_grid": "",
}
INT_FIELDS = {"m", "sectors", "antennas", "m_t", "m_r", "n_r"}
SECTIONS = ("scenario", "technique", "simulation")


class ScenarioError(DomainError):
    """A scenario document that cannot be parsed; the message names the key."""


@dataclass(frozen=True)
class ScenarioFile:
    scenario: NetworkScenario
    technique: TechniqueSpec
    trials: int = 100_000
    seed: int = 0
    region_radius: float | None = None
    fidelity: Fidelity = Fidelity.FULL
    pathloss_model: PathlossModel = PathlossModel.PURE
    far_field: FarField = FarField.MEAN
    lambda_grid: tuple[float, ...] = field(default_factory=tuple)
    outage_grid: tuple[float, ...] = field(default_factory=tuple)

    def sim_config(self, scenario: NetworkScenario | None = None, seed: int | None = None) -> SimConfig:
        return SimConfig(
            scenario=self.scenario if scenario is None else scenario,
            tech=self.technique,
            trials=self.trials,
            region_radius=self.region_radius,
            seed=self.seed if seed is None else seed,
            fidelity=self.fidelity,
            pathloss_model=self.pathloss_model,
            far_field=self.far_field,
        )

    def to_document(self) -> dict[str, dict[str, str]]:
        s = self.scenario
        tech = {"kind": self.technique.kind}
        tech.update({k: repr(v) for k, v in technique_params(self.technique).items() if v is not None})
        return {
            "scenario": {
                "lambda": repr(s.lam),
                "alpha": repr(s.alpha),
                "beta": repr(s.beta),
                "r_link": repr(s.r_link),
                "epsilon": repr(s.epsilon),
                "noise_ratio": repr(s.noise_ratio),
            },
            "technique": tech,
            "simulation": {
                "trials": str(self.trials),
                "seed": str(self.seed),
                "region_radius": "auto" if self.region_radius is None else repr(self.region_radius),
                "fidelity": self.fidelity.value,
                "pathloss_model": self.pathloss_model.value,
                "far_field": self.far_field.value,
                "lambda_grid": ", ".join(repr(v) for v in self.lambda_grid),
                "outage_grid": ", ".join(repr(v) for v in self.outage_grid),
            },
        }

    def to_text(self) -> str:
        lines = []
        for section, values in self.to_document().items():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in values.items())
            lines.append("")
        return "\n".join(lines)


def document_from_text(text: str, source: str = "<scenario>") -> dict[str, dict[str, str]]:
    """Raw section -> key -> value mapping, with structural checks only."""
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#",), comment_prefixes=("#",), interpolation=None, default_section="\0"
    )
    parser.optionxform = str  # keys are case-sensitive
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(f"{source}: {exc.message if hasattr(exc, 'message') else exc}") from None
    doc = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ScenarioError(f"unknown section [{section}]; expected one of {', '.join(SECTIONS)}")
        doc[section] = dict(parser.items(section))
    return doc


def _number(section: str, key: str, raw: str, kind=float):
    try:
        if kind is int:
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return float(raw)
    except ValueError:
        expected = "an integer" if kind is int else "a number"
        raise ScenarioError(f"[{section}] {key}: expected {expected}, got {raw!r}") from None


def _grid(key: str, raw: str) -> tuple[float, ...]:
    parts = [p.strip() for p in raw.replace(";", ",").split(",")]
    return tuple(_number("simulation", key, p) for p in parts if p)


def parse_scenario(doc: dict[str, dict[str, str]]) -> ScenarioFile:
    """Validate a raw document and build the typed scenario."""
    sc = dict(doc.get("scenario", {}))
    unknown = sorted(set(sc) - set(SCENARIO_KEYS))
    if unknown:
        raise ScenarioError(f"[scenario] unknown key {unknown[0]!r}")
    values = {}
    for key, default in SCENARIO_KEYS.items():
        if key in sc:
            values[key] = _number("scenario", key, sc[key])
        elif default is None:
            raise ScenarioError(f"[scenario] missing required key {key!r}")
        else:
            values[key] = default
    try:
        scenario = NetworkScenario(
            lam=values["lambda"],
            alpha=values["alpha"],
            beta=values["beta"],
            r_link=values["r_link"],
            epsilon=values["epsilon"],
            noise_ratio=values["noise_ratio"],
        )
    except DomainError as exc:
        raise ScenarioError(f"[scenario] {exc}") from None

    tech_doc = dict(doc.get("technique", {}))
    kind = tech_doc.pop("kind", None)
    if kind is None:
        raise ScenarioError("[technique] missing required key 'kind'")
    if kind not in TECHNIQUES:
        raise ScenarioError(f"[technique] kind: unknown technique {kind!r}; expected one of {sorted(TECHNIQUES)}")
    names = {f.name for f in dataclasses.fields(TECHNIQUES[kind])}
    params = {}
    for key, raw in tech_doc.items():
        if key not in names:
            raise ScenarioError(f"[technique] unknown key {key!r} for kind {kind!r}")
        params[key] = _number("technique", key, raw, int if key in INT_FIELDS else float)
    try:
        technique = technique_from_params(kind, params)
    except DomainError as exc:
        raise ScenarioError(f"[technique] {exc}") from None

    sim = dict(SIMULATION_DEFAULTS)
    given = doc.get("simulation", {})
    unknown = sorted(set(given) - set(SIMULATION_DEFAULTS))
    if unknown:
        raise ScenarioError(f"[simulation] unknown key {unknown[0]!r}")
    sim.update(given)
    radius = sim["region_radius"].strip()
    try:
        out = ScenarioFile(
            scenario=scenario,
            technique=technique,
            trials=_number("simulation", "trials", sim["trials"], int),
            seed=_number("simulation", "seed", sim["seed"], int),
            region_radius=None if radius.lower() == "auto" else _number("simulation", "region_radius", radius),
            fidelity=_choice(Fidelity, "fidelity", sim["fidelity"]),
            pathloss_model=_choice(PathlossModel, "pathloss_model", sim["pathloss_model"]),
            far_field=_choice(FarField, "far_field", sim["far_field"]),
            lambda_grid=_grid("lambda_grid", sim["lambda_grid"]),
            outage_grid=_grid("outage_grid", sim["outage_grid"]),
        )
        out.sim_config()  # validates trials, seed and radius
    except ScenarioError:
        raise
    except DomainError as exc:
        raise ScenarioError(f"[simulation] {exc}") from None
    for p in out.outage_grid:
        if not 0 < p < 1:
            raise ScenarioError(f"[simulation] outage_grid: values must lie in (0, 1), got {p}")
    for lam in out.lambda_grid:
        if lam < 0:
            raise ScenarioError(f"[simulation] lambda_grid: densities must be nonnegative, got {lam}")
    return out


def _choice(cls, key, raw):
    try:
        return cls(raw.strip())
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ScenarioError(f"[simulation] {key}: expected one of {choices}, got {raw!r}") from None


def load_scenario(path) -> ScenarioFile:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(document_from_text(fh.read(), source=str(path)))
