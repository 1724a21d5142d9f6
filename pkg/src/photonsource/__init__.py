"""Photon-number statistics of a driven two-level emitter.

Closed forms for square pulses, a generating-function integrator for
arbitrary fields, a quantum-jump Monte Carlo oracle and pulse optimizers.
Rates are in units of the spontaneous emission rate Gamma.
"""

from .closed_form import cf_fac2, cf_mean_n, cf_pn, cf_q, mandel_q
from .exceptions import (
    ConfigurationError,
    IntegrationError,
    NumericalInstabilityError,
    PhotonSourceError,
    RootNotFoundError,
)
from .gf import PhotonDistribution, moments, photon_distribution, propagate_gf, raf_distribution
from .montecarlo import McEstimate, simulate
from .optimize import (
    OptResult,
    maximize_global,
    maximize_on_resonance,
    maximize_over_t,
    maximize_raf,
    solve_p1_extremum,
)
from .params import RAF, EmitterParams, Piecewise, SquarePulse, field_from_config

__version__ = "0.1.0"

__all__ = [
    "EmitterParams",
    "SquarePulse",
    "RAF",
    "Piecewise",
    "field_from_config",
    "cf_pn",
    "cf_mean_n",
    "cf_fac2",
    "cf_q",
    "mandel_q",
    "PhotonDistribution",
    "propagate_gf",
    "photon_distribution",
    "moments",
    "raf_distribution",
    "McEstimate",
    "simulate",
    "OptResult",
    "maximize_over_t",
    "maximize_global",
    "maximize_on_resonance",
    "maximize_raf",
    "solve_p1_extremum",
    "PhotonSourceError",
    "ConfigurationError",
    "NumericalInstabilityError",
    "IntegrationError",
    "RootNotFoundError",
]
