"""chargeq: equilibria of logarithmically repelling unit charges.

Unit charges on the line (or a curve) repelling through the logarithmic
kernel, confined by an external field of fixed positive charges and a smooth
term.  The package computes their minimum-energy configurations, which
reproduce the zeros of the classical orthogonal polynomials and, with
per-gap count constraints, the Heine-Stieltjes polynomials of generalized
Lame equations; it also computes the constrained equilibrium measures that
describe the zero distributions as the degree grows.
"""

from .asymptotics import (
    BetaSolveError,
    EmpiricalDistribution,
    EquilibriumMeasure,
    arcsine_measure,
    beta_residuals,
    cauchy_transform,
    counting_function,
    density,
    equilibrium_measure,
    ks_distance,
    normalized_log_derivative,
    riccati_residual,
    solve_betas,
    support_intervals,
)
from .classical import (
    ClassicalFamily,
    evaluate,
    hermite,
    jacobi,
    laguerre,
    leading_coefficient,
    zeros,
)
from .energy import (
    ChargeConfiguration,
    InfiniteEnergyError,
    definiteness_check,
    gradient,
    hessian,
    mutual_energy,
    total_energy,
)
from .equilibrium import (
    ConvergenceError,
    EquilibriumResult,
    IntervalConstraint,
    PolylineContinuum,
    minimize,
    minimize_on_continuum,
    project_onto_continuum,
)
from .fields import (
    ExternalField,
    FixedCharge,
    hermite_field,
    jacobi_field,
    laguerre_field,
    lame_field,
)
from .lame import (
    EnumerationResult,
    HeineStieltjesSolution,
    LameSystem,
    enumerate_solutions,
    recover_van_vleck,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "BetaSolveError",
    "ChargeConfiguration",
    "ClassicalFamily",
    "ConvergenceError",
    "EmpiricalDistribution",
    "EnumerationResult",
    "EquilibriumMeasure",
    "EquilibriumResult",
    "ExternalField",
    "FixedCharge",
    "HeineStieltjesSolution",
    "InfiniteEnergyError",
    "IntervalConstraint",
    "LameSystem",
    "PolylineContinuum",
    "arcsine_measure",
    "beta_residuals",
    "cauchy_transform",
    "counting_function",
    "definiteness_check",
    "density",
    "enumerate_solutions",
    "equilibrium_measure",
    "evaluate",
    "gradient",
    "hermite",
    "hermite_field",
    "hessian",
    "jacobi",
    "jacobi_field",
    "ks_distance",
    "laguerre",
    "laguerre_field",
    "lame_field",
    "leading_coefficient",
    "minimize",
    "minimize_on_continuum",
    "mutual_energy",
    "normalized_log_derivative",
    "project_onto_continuum",
    "recover_van_vleck",
    "riccati_residual",
    "solve",
    "solve_betas",
    "support_intervals",
    "total_energy",
    "zeros",
]
