"""Scikit-learn style estimator wrapping the operator learners.

The estimator regresses time derivatives on states: ``fit(X, y)`` takes
snapshots with one row per time sample and one column per DOF, and
``predict(X)`` evaluates the learned semi-discrete right-hand side at given
states. It follows the scikit-learn parameter contract (all constructor
arguments stored verbatim, validation deferred to ``fit``), so it composes
with pipelines, grid search, and cross-validation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import (
    check_consistent_shapes,
    check_odd_stencil_size,
    check_snapshot_matrix,
    check_state_vector,
)
from .cases import n_stencils
from .forecast import integrate_model
from .grids import Grid1D, Grid2D
from .learn import RidgeConfig, learn_model
from .simulate import CaseParams, SnapshotMeta, SnapshotSet, fd_time_derivative


class StencilOperatorRegressor(BaseEstimator, RegressorMixin):
    """Learn sparse per-DOF stencil operators from snapshot data.

    Parameters
    ----------
    case : str
        One of "diffusion", "advection", "advection-diffusion", "burgers",
        "advection2d"; fixes the modeled semi-discrete form.
    method : str
        "LDO" (ridge regression) or "S-LDO" (stability-constrained).
    stencil_size, stencil_size_2 : int
        Odd stencil sizes; the second is required for two-operator cases.
    dt : float
        Sample spacing of the snapshot rows. Needed to extract time
        derivatives when ``fit`` is called without ``y``.
    c, nu, cx, cy : float
        Known physical constants of the case.
    domain_length : float or (float, float)
        Extent of the periodic domain; with ``grid_shape`` set, a 2-D box.
    grid_shape : tuple or None
        (ny, nx) for 2-D cases; columns of X are flattened row-major.
    beta1, beta2, penalty_scaling : ridge settings (LDO only).
    tol, margin, equilibrium : constrained-solver settings (S-LDO only).
    """

    def __init__(self, case="diffusion", method="S-LDO", stencil_size=3,
                 stencil_size_2=None, dt=None, c=0.0, nu=0.0, cx=0.0, cy=0.0,
                 domain_length=1.0, grid_shape=None, beta1=1e-3, beta2=0.0,
                 penalty_scaling="stored", tol=1e-6, margin=None,
                 equilibrium=None, threads=1):
        self.case = case
        self.method = method
        self.stencil_size = stencil_size
        self.stencil_size_2 = stencil_size_2
        self.dt = dt
        self.c = c
        self.nu = nu
        self.cx = cx
        self.cy = cy
        self.domain_length = domain_length
        self.grid_shape = grid_shape
        self.beta1 = beta1
        self.beta2 = beta2
        self.penalty_scaling = penalty_scaling
        self.tol = tol
        self.margin = margin
        self.equilibrium = equilibrium
        self.threads = threads

    def _build_grid(self, n_dofs):
        if self.grid_shape is not None:
            ny, nx = self.grid_shape
            if nx * ny != n_dofs:
                raise ValueError(f"grid_shape {self.grid_shape} inconsistent with {n_dofs} DOFs")
            extents = self.domain_length
            if np.isscalar(extents):
                extents = (extents, extents)
            return Grid2D(nx=nx, ny=ny, lx=float(extents[0]), ly=float(extents[1]))
        return Grid1D(n=n_dofs, length=float(self.domain_length))

    def _sizes(self):
        s1 = check_odd_stencil_size(self.stencil_size)
        if n_stencils(self.case) == 1:
            return s1
        if self.stencil_size_2 is None:
            raise ValueError(f"case {self.case!r} needs stencil_size_2")
        return (s1, check_odd_stencil_size(self.stencil_size_2, "stencil_size_2"))

    def fit(self, X, y=None):
        """Fit operators from states X (n_samples, n_dofs) and derivatives y.

        With ``y=None`` the derivatives are extracted from X by second-order
        finite differences using ``dt``.
        """
        X = check_snapshot_matrix(X)
        if self.dt is None or not self.dt > 0:
            raise ValueError("dt must be a positive float")
        if y is None:
            rhs = fd_time_derivative(X.T, self.dt)
            rhs_source = "finite-difference"
        else:
            y = check_snapshot_matrix(y, name="y")
            check_consistent_shapes(X, y)
            rhs = y.T
            rhs_source = "exact"
        grid = self._build_grid(X.shape[1])
        params = CaseParams(case=self.case, grid=grid, dt=float(self.dt),
                            n_snapshots=X.shape[0], c=self.c, nu=self.nu,
                            cx=self.cx, cy=self.cy)
        snap = SnapshotSet(
            times=np.arange(X.shape[0]) * float(self.dt),
            states=X.T,
            rhs=rhs,
            meta=SnapshotMeta(case=self.case, grid=grid, dt=float(self.dt),
                              rhs_source=rhs_source),
        )
        ridge = RidgeConfig(beta1=self.beta1, beta2=self.beta2,
                            scaling=self.penalty_scaling)
        self.model_ = learn_model(snap, params, self.method, self._sizes(),
                                  ridge=ridge, tol=self.tol, margin=self.margin,
                                  equilibrium=self.equilibrium, threads=self.threads)
        self.n_dofs_ = X.shape[1]
        self.operators_ = self.model_.operators
        return self

    def predict(self, X):
        """Learned du/dt at each state row of X."""
        self._check_fitted()
        X = check_snapshot_matrix(X)
        if X.shape[1] != self.n_dofs_:
            raise ValueError(f"X has {X.shape[1]} DOFs, fit used {self.n_dofs_}")
        return np.vstack([self.model_.rhs(row) for row in X])

    def forecast(self, u0, steps, guard=1e6):
        """Integrate the learned model forward; rows are states in time."""
        self._check_fitted()
        u0 = check_state_vector(u0, self.n_dofs_)
        traj = integrate_model(self.model_, u0, float(self.dt), steps, guard=guard)
        return traj.states.T

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise RuntimeError("estimator is not fitted; call fit first")
