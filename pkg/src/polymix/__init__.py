"""polymix: mixing analysis and simulation of directed lattice-polymer dynamics."""

__version__ = "0.1.0"

from .counts import (
    CountDistribution,
    conv_condition_check,
    count_distribution,
    lemma_bounds,
    minimal_conv_constant,
    partition_function,
)
from .errors import CapacityError, ConvergenceError, InvalidPathError, PolymixError
from .generator import GeneratorMatrix, build_generator, dirichlet_form, entropy
from .lsi import LsiReport, lsi_constant_estimate, mixing_bound_check
from .paths import (
    PolymerPath,
    StateIndex,
    enumerate_state_space,
    extremal_path,
    gradient,
    heat_bath_candidates,
    integrate,
    particle_counts,
)
from .spectral import (
    SpectralReport,
    exact_mixing_time,
    heat_kernel_row,
    kappa_value,
    spectral_gap,
    tv_from,
)
from .wilson import WilsonStatistic, eigenfunction_check, lower_bound_time

__all__ = [
    "CapacityError",
    "ConvergenceError",
    "CountDistribution",
    "GeneratorMatrix",
    "InvalidPathError",
    "LsiReport",
    "PolymixError",
    "PolymerPath",
    "SpectralReport",
    "StateIndex",
    "WilsonStatistic",
    "build_generator",
    "conv_condition_check",
    "count_distribution",
    "dirichlet_form",
    "entropy",
    "enumerate_state_space",
    "eigenfunction_check",
    "exact_mixing_time",
    "extremal_path",
    "gradient",
    "heat_bath_candidates",
    "heat_kernel_row",
    "integrate",
    "kappa_value",
    "lemma_bounds",
    "lower_bound_time",
    "lsi_constant_estimate",
    "minimal_conv_constant",
    "mixing_bound_check",
    "particle_counts",
    "partition_function",
    "spectral_gap",
    "tv_from",
    "__version__",
]
