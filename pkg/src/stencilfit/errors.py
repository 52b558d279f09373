"""Exception types raised across the package."""


class StencilFitError(Exception):
    """Base class for all package-specific errors."""


class InvalidStencilError(StencilFitError, ValueError):
    """A stencil pattern violates its invariants (even size, missing center, ...)."""


class AssemblyError(StencilFitError, ValueError):
    """Row collection cannot be assembled into an operator (missing/duplicate DOFs)."""


class DimensionError(StencilFitError, ValueError):
    """Array shapes are inconsistent with the operator or grid."""


class BlowUpError(StencilFitError, RuntimeError):
    """Time integration produced a non-finite state during data generation."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"state became non-finite at step {step}")


class InsufficientDataError(StencilFitError, ValueError):
    """Not enough snapshots for the requested computation."""


class SingularProblemError(StencilFitError, RuntimeError):
    """A per-DOF least-squares system is rank deficient with no regularization."""

    def __init__(self, dof, message=None):
        self.dof = dof
        super().__init__(message or f"singular regression system at DOF {dof}")


class ConstraintError(StencilFitError, ValueError):
    """A stability-constraint block could not be built."""


class QPFailureError(StencilFitError, RuntimeError):
    """The QP solver did not return an optimal solution."""

    def __init__(self, status, dof=None, message=None):
        self.status = status
        self.dof = dof
        if message is None:
            where = f" at DOF {dof}" if dof is not None else ""
            message = f"QP solver failed with status '{status}'{where}"
        super().__init__(message)


class SpectralFailureError(StencilFitError, RuntimeError):
    """The dense eigensolver did not converge."""


class ConfigError(StencilFitError, ValueError):
    """An experiment configuration file is invalid."""
