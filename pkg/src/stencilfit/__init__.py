"""stencilfit: learn sparse, provably stable differential-operator stencils.

Per-DOF least-squares regressions recover local finite-difference stencils
from PDE snapshot data; optional Gershgorin diagonal-dominance constraints
guarantee linear stability of the assembled semi-discrete system. The
package also generates reference data, analyzes spectra, forecasts with the
learned operators, and reports every comparison as CSV.
"""

__version__ = "0.1.0"

from .estimators import StencilOperatorRegressor
from .forecast import (
    averaged_stencil,
    integrate_model,
    relative_error_series,
    total_error,
    training_error,
)
from .grids import Grid1D, Grid2D
from .learn import (
    LearnedModel,
    RidgeConfig,
    StabilityConstraintSpec,
    learn_model,
    solve_ldo,
    solve_sldo,
)
from .operators import (
    AssembledOperator,
    LocalOperator,
    StencilSpec,
    apply,
    assemble,
    make_centered_stencil,
)
from .qp import QPSolution, QuadraticProgram, absval_reformulate, qp_solve
from .simulate import (
    CaseParams,
    SnapshotSet,
    burgers_rhs,
    fd_time_derivative,
    forward_euler,
    generate_case,
    initial_condition,
    reference_operator_1d,
    reference_operator_2d,
)
from .spectra import SpectralReport, eigenvalues, gershgorin_discs, stability_report

__all__ = [
    "AssembledOperator",
    "CaseParams",
    "Grid1D",
    "Grid2D",
    "LearnedModel",
    "LocalOperator",
    "QPSolution",
    "QuadraticProgram",
    "RidgeConfig",
    "SnapshotSet",
    "SpectralReport",
    "StabilityConstraintSpec",
    "StencilOperatorRegressor",
    "StencilSpec",
    "absval_reformulate",
    "apply",
    "assemble",
    "averaged_stencil",
    "burgers_rhs",
    "eigenvalues",
    "fd_time_derivative",
    "forward_euler",
    "generate_case",
    "gershgorin_discs",
    "initial_condition",
    "integrate_model",
    "learn_model",
    "make_centered_stencil",
    "qp_solve",
    "reference_operator_1d",
    "reference_operator_2d",
    "relative_error_series",
    "solve_ldo",
    "solve_sldo",
    "stability_report",
    "total_error",
    "training_error",
]
