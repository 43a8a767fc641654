"""Mean-field orientational free energies of Onsager type on the unit sphere."""

from .errors import (
    ConfigurationError,
    DomainError,
    FormatError,
    NumericalError,
    OnsagerError,
    StateError,
    ValidationError,
)
from .functional import (
    FreeEnergyBreakdown,
    OrientationProfile,
    energy_direct,
    energy_spectral,
    entropy,
    free_energy,
    order_parameter,
    uniform_profile,
)
from .legendre import (
    QuadratureRule,
    assoc_legendre_eval,
    gauss_legendre,
    legendre_eval,
    legendre_triple_integral,
)
from .potentials import (
    AngularPotential,
    SpatialKernel,
    big_phi_hat,
    load_tabulated,
    make_angular,
    make_kernel,
    phi_hat,
)
from .solver import (
    BifurcationScan,
    CriticalPoint,
    SolverConfig,
    best_critical_point,
    el_map,
    hessian_along_mode,
    scan,
    second_variation_mode,
    solve,
)
from .spectrum import (
    LegendreSpectrum,
    StabilityCertificate,
    certify,
    find_ell_star,
    spectrum_onsager_closed_form,
    spectrum_quadrature,
    spectrum_sinpow_exact,
)

__version__ = "0.1.0"

__all__ = [
    "AngularPotential",
    "BifurcationScan",
    "ConfigurationError",
    "CriticalPoint",
    "DomainError",
    "FormatError",
    "FreeEnergyBreakdown",
    "LegendreSpectrum",
    "NumericalError",
    "OnsagerError",
    "OrientationProfile",
    "QuadratureRule",
    "SolverConfig",
    "SpatialKernel",
    "StabilityCertificate",
    "StateError",
    "ValidationError",
    "assoc_legendre_eval",
    "best_critical_point",
    "big_phi_hat",
    "certify",
    "el_map",
    "energy_direct",
    "energy_spectral",
    "entropy",
    "find_ell_star",
    "free_energy",
    "gauss_legendre",
    "hessian_along_mode",
    "legendre_eval",
    "legendre_triple_integral",
    "load_tabulated",
    "make_angular",
    "make_kernel",
    "order_parameter",
    "phi_hat",
    "scan",
    "second_variation_mode",
    "solve",
    "spectrum_onsager_closed_form",
    "spectrum_quadrature",
    "spectrum_sinpow_exact",
    "uniform_profile",
]
