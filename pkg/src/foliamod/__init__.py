"""p-modulus of foliations given by submersions."""

from .errors import (DomainError, FoliamodError, NonConvergenceError, PreconditionError,
                     SingularGeometryError, UnsupportedExponentError)
from .gallery import EXAMPLES, build_example, expected_f0, expected_modulus
from .geometry import DensityBundle, FoliatedChart, densities, eval_metric, jacobian
from .kernels import BACKEND
from .modulus import (ModulusReport, closed_form_extremal, compute_report, modulus_base_formula,
                      modulus_direct)
from .optimizer import SolverConfig, solve_global, solve_leaf
from .quadrature import Quadrature, build_quadrature, hat, integrate_manifold, leaf_integrals

__all__ = [
    "BACKEND", "DensityBundle", "DomainError", "EXAMPLES", "FoliamodError", "FoliatedChart",
    "ModulusReport", "NonConvergenceError", "PreconditionError", "Quadrature",
    "SingularGeometryError", "SolverConfig", "UnsupportedExponentError", "build_example",
    "build_quadrature", "closed_form_extremal", "compute_report", "densities", "eval_metric",
    "expected_f0", "expected_modulus", "hat", "integrate_manifold", "jacobian", "leaf_integrals",
    "modulus_base_formula", "modulus_direct", "solve_global", "solve_leaf",
]
