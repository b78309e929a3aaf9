"""Numerov-type compact finite-difference scheme for the 1D wave equation on non-uniform meshes."""

from .errors import ConvergenceError, MeshError, ReferenceAccuracyError, SingularOperatorError
from .mesh import (
    Mesh,
    MeshFamilySpec,
    critical_mesh,
    extend_function,
    extend_mesh,
    from_steps,
    step_ratio_range,
    uniform_mesh,
)
from .modal import ModalParams, amplification, kappa0, modal_recursion, necessary_conditions
from .operators import TridiagonalOperator, assemble_lambda, assemble_sN, norms, tridiag_solve
from .reference import bump, images_solution, project
from .scheme import SchemeConfig, energy_history, run
from .spectral import (
    Classification,
    Spectrum,
    charpoly_roots_oracle,
    classify,
    generalized_eigenvalues,
    generalized_spectrum,
    verify_scaling,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "MeshError",
    "ReferenceAccuracyError",
    "SingularOperatorError",
    "Mesh",
    "MeshFamilySpec",
    "critical_mesh",
    "extend_function",
    "extend_mesh",
    "from_steps",
    "step_ratio_range",
    "uniform_mesh",
    "ModalParams",
    "amplification",
    "kappa0",
    "modal_recursion",
    "necessary_conditions",
    "TridiagonalOperator",
    "assemble_lambda",
    "assemble_sN",
    "norms",
    "tridiag_solve",
    "bump",
    "images_solution",
    "project",
    "SchemeConfig",
    "energy_history",
    "run",
    "Classification",
    "Spectrum",
    "charpoly_roots_oracle",
    "classify",
    "generalized_eigenvalues",
    "generalized_spectrum",
    "verify_scaling",
]
