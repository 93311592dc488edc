"""Moutard-type transforms for 2D Dirac systems and generalized analytic functions.

The pipeline: sample seed solutions on a rectangular grid, integrate their
potentials by path quadrature, assemble the matrix field, apply the
algebraic transform through per-node pivoted solves, and certify the
transformed equations by finite-difference residuals.
"""

from .dirac import (
    DiracPair,
    OmegaMatrix,
    SeedPair,
    SingularGridError,
    TransformResult,
    assemble_omega,
    det_field,
    transform,
    transform_conjugate_solution,
    transform_solution,
    transform_u,
    transform_v,
)
from .expr import SeedExpr, evaluate, parse, to_str
from .ga import GASeed, GATransformResult, check_reduction_symmetry, ga_transform, lift, project
from .grid import Domain, GridError, GridField, SampleError, dbar, dz, sample
from .potentials import (
    ImaginaryConstant,
    OneForm,
    check_closedness,
    enforce_imaginary,
    integrate_one_form,
    omega_integrand,
    path_independence_residual,
)
from .verify import (
    convergence_order,
    locate_singular_set,
    residual_dirac,
    residual_dirac_conjugate,
    residual_ga,
    residual_ga_conjugate,
)

__version__ = "0.1.0"

__all__ = [
    "Domain",
    "GridField",
    "GridError",
    "SampleError",
    "sample",
    "dbar",
    "dz",
    "SeedExpr",
    "parse",
    "evaluate",
    "to_str",
    "ImaginaryConstant",
    "OneForm",
    "omega_integrand",
    "check_closedness",
    "integrate_one_form",
    "path_independence_residual",
    "enforce_imaginary",
    "DiracPair",
    "SeedPair",
    "OmegaMatrix",
    "TransformResult",
    "SingularGridError",
    "assemble_omega",
    "det_field",
    "transform",
    "transform_u",
    "transform_v",
    "transform_solution",
    "transform_conjugate_solution",
    "GASeed",
    "GATransformResult",
    "lift",
    "project",
    "ga_transform",
    "check_reduction_symmetry",
    "residual_ga",
    "residual_ga_conjugate",
    "residual_dirac",
    "residual_dirac_conjugate",
    "convergence_order",
    "locate_singular_set",
    "__version__",
]
