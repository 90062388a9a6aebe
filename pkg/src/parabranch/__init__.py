"""parabranch: long-time fate of a parasite-infected branching cell
population as a function of the parasite-partitioning kernel, with Monte
Carlo verification via the full particle system and its spinal reduction.
"""

__version__ = "0.1.0"

from ._backend import backend_name
from .classify import (ModelParams, RegimeReport, StableJumpParams, classify,
                       construct_survival_kernel, growth_indicator,
                       laplace_exponent, minimize_exponent,
                       sufficient_survival, threshold, x0)
from .errors import (BudgetExceeded, KernelFormatError, MaxCellsExceeded,
                     ParabranchError, PreconditionViolated, SearchExhausted,
                     SnapshotsMissing)
from .kernels import (BetaSym, Deterministic, Equal, FinitePoint,
                      KernelMoments, PartitionKernel, Uniform,
                      format_kernel, incomplete_beta, mellin, moments,
                      parse_kernel, sample, z_of_alpha)
from .phase import AxisSpec, PhaseGrid, multimodal_scatter, survival_boundary, sweep
from .simulate import (ModelFunctions, PopulationTrajectory, SimConfig,
                       infected_fraction, simulate_population)
from .spine import (SpineConfig, many_to_one_check, mean_cells_via_spine,
                    nonexplosion_probability, psi0, simulate_spine)

__all__ = [
    "__version__", "backend_name",
    "ModelParams", "StableJumpParams", "RegimeReport",
    "classify", "growth_indicator", "laplace_exponent", "minimize_exponent",
    "sufficient_survival", "threshold", "x0", "construct_survival_kernel",
    "PartitionKernel", "Deterministic", "BetaSym", "Uniform", "Equal",
    "FinitePoint", "KernelMoments", "sample", "mellin", "moments",
    "incomplete_beta", "z_of_alpha", "parse_kernel", "format_kernel",
    "AxisSpec", "PhaseGrid", "sweep", "survival_boundary", "multimodal_scatter",
    "ModelFunctions", "SimConfig", "PopulationTrajectory",
    "simulate_population", "infected_fraction",
    "SpineConfig", "simulate_spine", "nonexplosion_probability",
    "mean_cells_via_spine", "many_to_one_check", "psi0",
    "ParabranchError", "KernelFormatError", "PreconditionViolated",
    "SearchExhausted", "BudgetExceeded", "MaxCellsExceeded", "SnapshotsMissing",
]
