"""Bound states of the D-dimensional Dirac equation with a trigonometric Scarf potential.

Spin and pseudospin symmetry limits, solved through a Nikiforov-Uvarov engine,
closed-form energy equations, normalized spinor components and an independent
finite-difference oracle.
"""

from .core import ModelParams, ParameterError, QuantumNumbers, ScarfError, Symmetry, derived_coefficients, kappa_of
from .spectra import EnergyEquationSpec, EnergyRoot, Variant, audit_table, residual, solve_complex, solve_real

__all__ = [
    "ModelParams",
    "ParameterError",
    "QuantumNumbers",
    "ScarfError",
    "Symmetry",
    "derived_coefficients",
    "kappa_of",
    "EnergyEquationSpec",
    "EnergyRoot",
    "Variant",
    "audit_table",
    "residual",
    "solve_complex",
    "solve_real",
]

__version__ = "0.1.0"
