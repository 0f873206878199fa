"""Archimedean copulas: exchangeable generators and hierarchical structures."""

from .estimation import estimate_structure, exchangeable_model
from .generators import (
    ArchimedeanGenerator,
    GeneratorFamily,
    ac_bivariate_density,
    ac_cdf,
    bivariate_cdf,
    bivariate_grid,
    psi,
    psi_inverse,
)
from .hac import (
    HacInternal,
    HacLeaf,
    HacModel,
    check_nesting,
    format_structure,
    hac_cdf,
    model_from_payload,
    model_to_payload,
    parse_structure,
)
from .kendall import (
    TauEstimate,
    empirical_kendall_matrix,
    tau_from_theta,
    tau_monte_carlo,
    theta_from_tau,
)
from .sampling import sample_ac, sample_hac

__all__ = [
    "ArchimedeanGenerator",
    "GeneratorFamily",
    "HacInternal",
    "HacLeaf",
    "HacModel",
    "TauEstimate",
    "ac_bivariate_density",
    "ac_cdf",
    "bivariate_cdf",
    "bivariate_grid",
    "check_nesting",
    "empirical_kendall_matrix",
    "estimate_structure",
    "exchangeable_model",
    "format_structure",
    "hac_cdf",
    "model_from_payload",
    "model_to_payload",
    "parse_structure",
    "psi",
    "psi_inverse",
    "sample_ac",
    "sample_hac",
    "tau_from_theta",
    "tau_monte_carlo",
    "theta_from_tau",
]
