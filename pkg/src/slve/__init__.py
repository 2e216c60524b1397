"""Strain-limiting viscoelasticity in one dimension.

Two rate-type viscoelastic regularizations of the same strain-limited
elastic response, side by side:

* stress-rate: eps = h(T) - gamma*dT/dt, which is catastrophically
  unstable in the linearized dynamics (growth at every wavelength), and
* strain-rate: eps + nu*d(eps)/dt = g(T), which is uniformly stable.

The package provides the constitutive catalog, exact linear mode analysis
of both models in extended precision, energy-balance-audited PDE solvers,
traveling-wave front construction with the shared reduction that maps one
model's profiles onto the other's, and a small CLI (``slve``) driving all
of it from INI configs.
"""

from .constitutive import (
    ConstitutiveFunction,
    DissipationAudit,
    Kind,
    PotentialPair,
    audit_dissipation,
    compliance,
    custom_constitutive,
    invert,
    invert_array,
    make_constitutive,
    potential_from_response,
    response_from_potential,
)
from .core import (
    Boundary,
    Field,
    Grid1D,
    ModelParams,
    NondimScales,
    Variant,
    dimensionless_params,
    first_derivative,
    integrate_field,
    nondimensionalize,
    redimensionalize,
    second_derivative,
    spatial_derivative,
)
from .dispersion import (
    Classification,
    DispersionResult,
    FourierMode,
    LinearModel,
    ModeTrajectory,
    dispersion,
    evolve_single_mode,
    fit_growth_rate,
    fit_mode_rates,
    growth_rate_curve,
    locate_critical_wavenumber,
    strain_rate_dispersion,
    stress_rate_dispersion,
)
from .errors import (
    BlowUpError,
    ConfigError,
    DegenerateEquilibriaError,
    InvalidHistoryError,
    InvalidParameterError,
    InvalidStepError,
    InvalidWindowError,
    NoKinkError,
    NoRealSpeedError,
    NumericalDerivativeError,
    OutOfRangeError,
    SingularLimitError,
    SlveError,
    SpanTooShortError,
    StrainLimitExceededError,
)
from .pde import (
    EnergyReport,
    SimState,
    SolverConfig,
    StateDerivative,
    energy_report,
    energy_series,
    gaussian_bump_state,
    relax_stress,
    rhs_elastic,
    rhs_strain_rate,
    rhs_stress_rate,
    simulate,
    single_mode_state,
    stability_ceiling,
    step,
    stored_energy_density,
    total_energy,
    zero_state,
)
from .twave import (
    KinkDiagnostic,
    KinkProfile,
    TravelingWaveProblem,
    UnificationReport,
    balance_function,
    first_order_residual,
    kink_exists,
    kink_initial_state,
    kink_profile,
    make_problem,
    reduction_kappa,
    second_order_residual,
    unified_reduction_check,
    wave_speed,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "Boundary",
    "Variant",
    "Grid1D",
    "Field",
    "ModelParams",
    "NondimScales",
    "nondimensionalize",
    "redimensionalize",
    "dimensionless_params",
    "integrate_field",
    "first_derivative",
    "second_derivative",
    "spatial_derivative",
    # constitutive
    "Kind",
    "ConstitutiveFunction",
    "PotentialPair",
    "DissipationAudit",
    "make_constitutive",
    "custom_constitutive",
    "potential_from_response",
    "response_from_potential",
    "compliance",
    "audit_dissipation",
    "invert",
    "invert_array",
    # dispersion
    "LinearModel",
    "Classification",
    "FourierMode",
    "DispersionResult",
    "ModeTrajectory",
    "dispersion",
    "strain_rate_dispersion",
    "stress_rate_dispersion",
    "growth_rate_curve",
    "locate_critical_wavenumber",
    "evolve_single_mode",
    "fit_growth_rate",
    "fit_mode_rates",
    # pde
    "SimState",
    "StateDerivative",
    "SolverConfig",
    "EnergyReport",
    "rhs_stress_rate",
    "rhs_strain_rate",
    "rhs_elastic",
    "step",
    "simulate",
    "stability_ceiling",
    "stored_energy_density",
    "total_energy",
    "energy_report",
    "energy_series",
    "zero_state",
    "gaussian_bump_state",
    "single_mode_state",
    "relax_stress",
    # twave
    "TravelingWaveProblem",
    "KinkDiagnostic",
    "KinkProfile",
    "UnificationReport",
    "wave_speed",
    "reduction_kappa",
    "make_problem",
    "balance_function",
    "kink_exists",
    "kink_profile",
    "first_order_residual",
    "second_order_residual",
    "unified_reduction_check",
    "kink_initial_state",
    # errors
    "SlveError",
    "InvalidParameterError",
    "InvalidHistoryError",
    "OutOfRangeError",
    "InvalidStepError",
    "InvalidWindowError",
    "DegenerateEquilibriaError",
    "NoRealSpeedError",
    "SingularLimitError",
    "ConfigError",
    "StrainLimitExceededError",
    "NumericalDerivativeError",
    "BlowUpError",
    "NoKinkError",
    "SpanTooShortError",
]
