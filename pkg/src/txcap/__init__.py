"""Transmission capacity of Poisson ad hoc networks with multi-antenna techniques."""

from .analytic import (
    CapacityResult,
    c_alpha_m,
    capacity_for_technique,
    density_for_outage,
    exact_success_probability,
    k_alpha,
    k_alpha_m,
    laplace_derivative,
    laplace_value,
    mixed_nakagami_density,
    outage_probability,
    success_probability,
)
from .ccdf import (
    ExpPoly,
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
    TxSelectionMrc,
)
from .montecarlo import Fidelity, OutageEstimate, PathlossModel, SimConfig, estimate_outage

__version__ = "0.1.0"
