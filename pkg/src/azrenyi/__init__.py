"""Numerical toolkit for alpha-z Renyi divergences of positive matrices."""
from .divergence import (
    AlphaZ,
    DomainError,
    Region,
    classical_renyi,
    d_alpha_inf,
    d_alpha_z,
    q_alpha_inf,
    q_alpha_z,
    relative_entropy_d1,
)
from .channels import QuantumMap, Subalgebra, dpi_gap, make_channel, petz_dual, predual, sufficiency_test
from .variational import OptimizerConfig, VariationalProblem, numeric_optimize

__all__ = [
    "AlphaZ",
    "DomainError",
    "OptimizerConfig",
    "QuantumMap",
    "Region",
    "Subalgebra",
    "VariationalProblem",
    "classical_renyi",
    "d_alpha_inf",
    "d_alpha_z",
    "dpi_gap",
    "make_channel",
    "numeric_optimize",
    "petz_dual",
    "predual",
    "q_alpha_inf",
    "q_alpha_z",
    "relative_entropy_d1",
    "sufficiency_test",
]
