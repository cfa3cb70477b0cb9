"""Network scenario and diversity-technique descriptions."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import ClassVar, Union

from .errors import DomainError

__all__ = [
    "NetworkScenario",
    "SisoNakagami",
    "Sectorized",
    "Mrc",
    "MrtMrc",
    "Ostbc",
    "SelectionPair",
    "TxSelectionMrc",
    "TechniqueSpec",
    "TECHNIQUES",
    "technique_from_params",
    "technique_params",
]


@dataclass(frozen=True)
class NetworkScenario:
    """Physical parameters of the random-access network.

    ``lam`` is the transmitter density (the scenario-file key is ``lambda``),
    ``beta`` the linear SINR target, ``r_link`` the fixed transmitter-receiver
    distance and ``noise_ratio`` the thermal noise over transmit power N0/ρ
    (0 for an interference-limited network).
    """

    lam: float
    alpha: float
    beta: float
    r_link: float
    epsilon: float = 0.05
    noise_ratio: float = 0.0

    def __post_init__(self):
        for name in ("lam", "alpha", "beta", "r_link", "epsilon", "noise_ratio"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or math.isnan(value) or math.isinf(value):
                raise DomainError(f"{_file_key(name)} must be a finite number, got {value!r}")
        if self.alpha <= 2:
            raise DomainError(f"alpha must exceed 2, got {self.alpha}")
        if self.lam < 0:
            raise DomainError(f"lambda must be nonnegative, got {self.lam}")
        if self.beta <= 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if self.r_link <= 0:
            raise DomainError(f"r_link must be positive, got {self.r_link}")
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.noise_ratio < 0:
            raise DomainError(f"noise_ratio must be nonnegative, got {self.noise_ratio}")

    @property
    def delta(self) -> float:
        """2/α, the exponent that runs through every formula."""
        return 2.0 / self.alpha

    @property
    def beta_r(self) -> float:
        """β R^α, the Laplace argument for the unit-scale signal."""
        return self.beta * self.r_link**self.alpha

    def replace(self, **changes) -> "NetworkScenario":
        return dataclasses.replace(self, **changes)


def _file_key(field: str) -> str:
    return "lambda" if field == "lam" else field


def _check_int(owner: str, name: str, value, minimum: int = 1) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise DomainError(f"{owner}.{name} must be an integer >= {minimum}, got {value!r}")


@dataclass(frozen=True)
class SisoNakagami:
    """Single antenna, Nakagami-m fading on every link (m=1 is Rayleigh)."""

    kind: ClassVar[str] = "siso_nakagami"
    m: int = 1

    def __post_init__(self):
        _check_int(self.kind, "m", self.m)


@dataclass(frozen=True)
class Sectorized:
    """``sectors`` static sectors per node with constant sidelobe ratio."""

    kind: ClassVar[str] = "sectorized"
    sectors: int
    gamma_sidelobe: float = 0.0
    m: int = 1

    def __post_init__(self):
        _check_int(self.kind, "sectors", self.sectors)
        _check_int(self.kind, "m", self.m)
        if not 0.0 <= self.gamma_sidelobe <= 1.0:
            raise DomainError(f"sectorized.gamma_sidelobe must lie in [0, 1], got {self.gamma_sidelobe}")

    @property
    def main_gain(self) -> float:
        """Aperture gain inside the sector under constant total power."""
        return self.sectors / (1.0 + self.gamma_sidelobe * (self.sectors - 1))


@dataclass(frozen=True)
class Mrc:
    """One transmit antenna, maximal ratio combining over ``antennas``."""

    kind: ClassVar[str] = "mrc"
    antennas: int

    def __post_init__(self):
        _check_int(self.kind, "antennas", self.antennas)


@dataclass(frozen=True)
class MrtMrc:
    """Dominant-eigenmode beamforming at both ends."""

    kind: ClassVar[str] = "mrt_mrc"
    m_t: int
    m_r: int

    def __post_init__(self):
        _check_int(self.kind, "m_t", self.m_t)
        _check_int(self.kind, "m_r", self.m_r)


@dataclass(frozen=True)
class Ostbc:
    """Orthogonal space-time block code with MRC at the receiver.

    ``n_r`` is the number of slots each symbol is repeated in and defaults to
    ``m_t``.  ``code_rate`` is the symbols-per-slot rate of the code; when
    left unset no rate penalty is applied to transmission capacity.  The
    generalized complex orthogonal designs for m_t > 2 have rate 1/2.
    """

    kind: ClassVar[str] = "ostbc"
    m_t: int
    m_r: int = 1
    n_r: int | None = None
    code_rate: float | None = None

    def __post_init__(self):
        _check_int(self.kind, "m_t", self.m_t)
        _check_int(self.kind, "m_r", self.m_r)
        if self.n_r is None:
            object.__setattr__(self, "n_r", self.m_t)
        _check_int(self.kind, "n_r", self.n_r)
        if self.code_rate is not None and not 0.0 < self.code_rate <= 1.0:
            raise DomainError(f"ostbc.code_rate must lie in (0, 1], got {self.code_rate}")


@dataclass(frozen=True)
class SelectionPair:
    """Select the strongest single (transmit, receive) antenna pair."""

    kind: ClassVar[str] = "selection_pair"
    m_t: int
    m_r: int

    def __post_init__(self):
        _check_int(self.kind, "m_t", self.m_t)
        _check_int(self.kind, "m_r", self.m_r)


@dataclass(frozen=True)
class TxSelectionMrc:
    """Select the transmit antenna whose MRC output is strongest."""

    kind: ClassVar[str] = "tx_selection_mrc"
    m_t: int
    m_r: int

    def __post_init__(self):
        _check_int(self.kind, "m_t", self.m_t)
        _check_int(self.kind, "m_r", self.m_r)


TechniqueSpec = Union[SisoNakagami, Sectorized, Mrc, MrtMrc, Ostbc, SelectionPair, TxSelectionMrc]

TECHNIQUES: dict[str, type] = {
    cls.kind: cls
    for cls in (SisoNakagami, Sectorized, Mrc, MrtMrc, Ostbc, SelectionPair, TxSelectionMrc)
}


def technique_from_params(kind: str, params: dict) -> TechniqueSpec:
    """Build a technique from its ``kind`` tag and field values."""
    try:
        cls = TECHNIQUES[kind]
    except KeyError:
        raise DomainError(f"unknown technique kind {kind!r}; expected one of {sorted(TECHNIQUES)}") from None
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(params) - names)
    if unknown:
        raise DomainError(f"unknown key {unknown[0]!r} for technique {kind!r}")
    try:
        return cls(**params)
    except TypeError as exc:
        raise DomainError(f"technique {kind!r}: {exc}") from None


def technique_params(tech: TechniqueSpec) -> dict:
    return dataclasses.asdict(tech)
