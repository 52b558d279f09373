"""The two learning paths: unconstrained ridge and stability-constrained.

Both paths pose one small least-squares problem per DOF (normalized by the
local solution-window norm) and assemble the per-DOF rows into operators.
The constrained path adds the diagonal-dominance rows that make the
assembled right-hand-side combination provably stable: for linear cases the
constraint acts on the modeled combination row directly; for the quadratic
transport case it acts on the operator linearized about a constant
equilibrium state, which keeps the constraint affine in the unknowns.

Per-DOF solves are independent: identical answers regardless of the order
(or thread) in which DOFs are processed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .cases import layout_for_case, n_stencils
from .errors import ConstraintError, QPFailureError, SingularProblemError
from .features import NORM_FLOOR, FeatureLayout, RegressionProblem
from .operators import AssembledOperator, assemble_uniform
from .qp import QuadraticProgram, absval_reformulate, extend_hessian, qp_solve
from .simulate import CaseParams, SnapshotSet

MU_RELATIVE = 1e-12  # Tikhonov floor making rank-deficient blocks a min-norm choice
DEFAULT_TOL = 1e-6
DEFAULT_MARGIN = 1e-8  # strict-inequality margin for the linearized nonlinear constraint


@dataclass(frozen=True)
class RidgeConfig:
    """Ridge weights for the unconstrained path.

    ``beta1`` penalizes linear blocks, ``beta2`` quadratic blocks, acting on
    the stored coefficients directly by default. With
    ``scaling="dimensionless"`` the penalty acts on the dimensionless stencil
    coefficients (stored block / its natural magnitude) instead, so one beta
    means the same thing across operators of different derivative order.
    """

    beta1: float = 1e-3
    beta2: float = 0.0
    scaling: str = "stored"

    def __post_init__(self):
        if self.beta1 < 0 or self.beta2 < 0:
            raise ValueError("ridge weights must be nonnegative")
        if self.scaling not in ("stored", "dimensionless"):
            raise ValueError("scaling must be 'stored' or 'dimensionless'")

    def penalty_diagonal(self, layout: FeatureLayout) -> np.ndarray:
        diag = np.empty(layout.p)
        for b, cols in zip(layout.blocks, layout.column_slices()):
            beta = self.beta1 if b.kind == "linear" else self.beta2
            if self.scaling == "dimensionless":
                beta = beta / b.nondim**2
            diag[cols] = beta
        return diag


@dataclass(frozen=True)
class StabilityConstraintSpec:
    """Which combination of learned rows must be diagonally dominant."""

    mode: str  # "linear-combined" | "burgers-linearized" | "advect2d-combined"
    equilibrium: float | None = None
    margin: float = 0.0
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("linear-combined", "burgers-linearized", "advect2d-combined"):
            raise ValueError(f"unknown constraint mode {self.mode!r}")
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")
        if self.mode == "burgers-linearized" and self.equilibrium is None:
            raise ValueError("burgers-linearized mode requires an equilibrium value")


@dataclass(frozen=True)
class LearnedModel:
    """Assembled physical operators plus per-DOF solver diagnostics."""

    case: str
    method: str  # "LDO" | "S-LDO"
    operators: dict
    layout: FeatureLayout
    params: CaseParams
    diagnostics: dict
    config: dict

    @property
    def grid(self):
        return self.params.grid

    def stored_coefficients(self) -> np.ndarray:
        """(n, p) stored (constant-folded) coefficient matrix."""
        cols = []
        for b in self.layout.blocks:
            cols.append(self.operators[b.name].coefficient_matrix() * b.scale)
        return np.hstack(cols)

    def form_operator(self) -> AssembledOperator:
        """Right-hand-side combination F with du/dt = -F u (linear cases)."""
        M = self.layout.form_combination_matrix()
        rows = self.stored_coefficients() @ M.T
        return assemble_uniform(self.layout.union, rows, self.grid.n,
                                shape=self.layout.grid_shape)

    def constrained_operator(self, equilibrium: float | None = None) -> AssembledOperator:
        """The operator whose dominance the constrained path guarantees.

        Linear cases: the modeled combination itself. Quadratic transport:
        the operator linearized at the given (or trained) equilibrium.
        """
        if self.case != "burgers":
            return self.form_operator()
        u0 = self.config.get("equilibrium") if equilibrium is None else equilibrium
        if u0 is None:
            raise ConstraintError("no equilibrium recorded; pass one explicitly")
        M = _linearization_matrix(self.layout, float(u0))
        rows = self.stored_coefficients() @ M.T
        return assemble_uniform(self.layout.union, rows, self.grid.n)

    def rhs(self, u: np.ndarray) -> np.ndarray:
        """Model right-hand side du/dt at one state."""
        if self.case == "burgers":
            N, L = self.operators["N"], self.operators["L"]
            nu = self.params.nu
            return -u * N.apply(u) + nu * L.apply(u)
        return -self.form_operator().apply(u)


# Unconstrained path ==========================================================

def solve_ldo(p: RegressionProblem, cfg: RidgeConfig) -> np.ndarray:
    """Ridge solution of one per-DOF problem.

    With a nonzero penalty this is the symmetric positive-definite solve of
    the normal equations (X'X + B) theta = X'y. The unregularized problem is
    solved with an orthogonal factorization instead: squaring the data matrix
    would waste half the available precision exactly where the acceptance
    checks demand exact recovery (near-symmetric solution windows).
    """
    diag = cfg.penalty_diagonal(p.layout)
    if np.all(diag == 0.0):
        theta, _, rank, _ = sla.lstsq(p.X, p.y, lapack_driver="gelsd")
        if rank < p.layout.p:
            raise SingularProblemError(p.dof)
        return theta
    XtX = p.X.T @ p.X
    try:
        c, low = sla.cho_factor(XtX + np.diag(diag))
        return sla.cho_solve((c, low), p.X.T @ p.y)
    except np.linalg.LinAlgError as exc:
        raise SingularProblemError(p.dof) from exc


# Constraint construction =====================================================

def linearize_burgers(N_i: np.ndarray, L_i: np.ndarray, u0: float,
                      layout: FeatureLayout, nu: float) -> np.ndarray:
    """Row of the transport operator linearized at the constant state u0.

    With quadratic features z_k = u_i u_{i+k}, differentiating the modeled
    form at u = u0 gives u0*N_k off center and u0*(N_0 + sum_k N_k) at the
    center, minus nu*L aligned on the union stencil.
    """
    N_i = np.asarray(N_i, dtype=float)
    L_i = np.asarray(L_i, dtype=float)
    nb, lb = layout.blocks
    union = layout.union
    pos = {off: k for k, off in enumerate(union.offsets)}
    row = np.zeros(union.size)
    total = N_i.sum()
    for j, off in enumerate(nb.stencil.offsets):
        row[pos[off]] += u0 * N_i[j] if off != 0 else u0 * (N_i[j] + total)
    for j, off in enumerate(lb.stencil.offsets):
        row[pos[off]] -= nu * L_i[j]
    return row


def _linearization_matrix(layout: FeatureLayout, u0: float) -> np.ndarray:
    """Linear map from stored coefficients to the linearized-operator row."""
    nb, lb = layout.blocks
    if nb.kind != "quadratic" or lb.kind != "linear":
        raise ConstraintError("burgers linearization expects (quadratic, linear) blocks")
    union = layout.union
    pos = {off: k for k, off in enumerate(union.offsets)}
    M = np.zeros((union.size, layout.p))
    (ncols, lcols) = layout.column_slices()
    center_row = pos[0]
    for j, off in enumerate(nb.stencil.offsets):
        col = ncols.start + j
        M[pos[off], col] += u0
        M[center_row, col] += u0  # the center derivative carries sum_k N_k
    for j, off in enumerate(lb.stencil.offsets):
        # stored linear block is already -nu * L
        M[pos[off], lcols.start + j] += 1.0
    return M


def build_stability_constraints(spec: StabilityConstraintSpec, layout: FeatureLayout):
    """Dominance rows for the case's constrained combination.

    Returns the slack-reformulated constraint block over [theta; slacks].
    """
    if spec.mode in ("linear-combined", "advect2d-combined"):
        M = layout.form_combination_matrix()
    else:
        M = _linearization_matrix(layout, float(spec.equilibrium))
    if M.shape[0] == 0:
        raise ConstraintError("empty union stencil")
    center = list(layout.union.offsets).index((0, 0) if layout.union.is_2d else 0)
    return absval_reformulate(layout.p, center, margin=spec.margin, combination=M)


def _lift_direction(spec: StabilityConstraintSpec, layout: FeatureLayout) -> np.ndarray:
    """Decision direction that raises the combination's center entry by one.

    Used to clip an infeasible warm start onto the feasible set by lifting
    the center coefficient only.
    """
    slices = layout.column_slices()
    if spec.mode == "burgers-linearized":
        lb, cols = layout.blocks[1], slices[1]
    else:
        lb, cols = layout.blocks[0], slices[0]
    col = cols.start + lb.stencil.center_pos
    d = np.zeros(layout.p)
    if spec.mode == "burgers-linearized":
        d[col] = 1.0  # stored -nu*L block maps with unit weight
    else:
        d[col] = layout.target_sign
    return d


def default_constraint_spec(params: CaseParams, snap: SnapshotSet | None = None,
                            margin: float | None = None,
                            equilibrium: float | None = None) -> StabilityConstraintSpec:
    """Canonical constraint for a case; the Burgers equilibrium defaults to
    the mean of the training states."""
    constants = {k: getattr(params, k) for k in ("c", "nu", "cx", "cy")}
    if params.case == "burgers":
        if equilibrium is None:
            if snap is None:
                raise ConstraintError("burgers constraints need snapshots or an equilibrium")
            equilibrium = float(snap.states.mean())
        return StabilityConstraintSpec(
            "burgers-linearized",
            equilibrium=equilibrium,
            margin=DEFAULT_MARGIN if margin is None else margin,
            constants=constants,
        )
    mode = "advect2d-combined" if params.case == "advection2d" else "linear-combined"
    return StabilityConstraintSpec(mode, margin=0.0 if margin is None else margin,
                                   constants=constants)


# Constrained path ============================================================

def solve_sldo(p: RegressionProblem, spec: StabilityConstraintSpec,
               tol: float = DEFAULT_TOL, max_iter: int = 500):
    """Least squares subject to the dominance constraint; no ridge term.

    Returns (coefficients, diagnostics). The unconstrained minimizer is
    accepted outright when it already satisfies the constraint (it is then
    the constrained optimum); otherwise the slack-reformulated QP is solved
    from the clipped warm start.
    """
    XtX = p.X.T @ p.X
    Xty = p.X.T @ p.y
    return _solve_sldo_normal(XtX, Xty, p.layout, spec, tol=tol, max_iter=max_iter,
                              dof=p.dof)


def _solve_sldo_normal(XtX, Xty, layout, spec, tol, max_iter, dof=None,
                       block=None, lift=None):
    mu = MU_RELATIVE * max(1.0, float(np.abs(np.diag(XtX)).max()))
    A = XtX + mu * np.eye(layout.p)
    theta = sla.cho_solve(sla.cho_factor(A), Xty)
    if block is None:
        block = build_stability_constraints(spec, layout)
    gap = spec.margin - block.dominance_margin(theta)
    row_scale = float(np.abs(block.combination @ theta).sum()) + abs(spec.margin)
    if gap <= 1e-12 * max(1.0, row_scale):
        return theta, {"status": "unconstrained", "iterations": 0, "kkt_residual": 0.0}

    if lift is None:
        lift = _lift_direction(spec, layout)
    warm = theta + gap * lift
    x0 = np.concatenate([warm, block.slacks_for(warm)])
    H = extend_hessian(2.0 * A, block.n_slack)
    g = np.concatenate([-2.0 * Xty, np.zeros(block.n_slack)])
    qp = QuadraticProgram(H=H, g=g, G=block.G, h=block.h)
    sol = qp_solve(qp, tol=tol, max_iter=max_iter, x0=x0)
    if sol.status != "optimal":
        raise QPFailureError(sol.status, dof=dof)
    return sol.x[: layout.p], {
        "status": sol.status,
        "iterations": sol.iterations,
        "kkt_residual": sol.kkt_residual,
    }


# Batched assembly over all DOFs ==============================================

def _block_column_features(states: np.ndarray, layout: FeatureLayout):
    """Yield (n, n_t) feature arrays, one per design column, all DOFs at once."""
    n = states.shape[0]
    if layout.grid_shape is not None:
        ny, nx = layout.grid_shape
        S3 = states.reshape(ny, nx, -1)
    for b in layout.blocks:
        for off in b.stencil.offsets:
            if layout.grid_shape is not None:
                ox, oy = off
                F = np.roll(np.roll(S3, -oy, axis=0), -ox, axis=1).reshape(n, -1)
            else:
                F = np.roll(states, -off, axis=0)
            yield states * F if b.kind == "quadratic" else F


def _normal_equation_batches(snap: SnapshotSet, layout: FeatureLayout):
    """Normalized (n,p,p) Gram matrices, (n,p) moments, and window norms."""
    states = snap.states
    n = snap.n
    p = layout.p
    cols = list(_block_column_features(states, layout))
    y = -layout.target_sign * snap.rhs

    norms = np.zeros(n)
    if layout.grid_shape is not None:
        ny, nx = layout.grid_shape
        S3 = states.reshape(ny, nx, -1)
    for off in layout.union.offsets:
        if layout.grid_shape is not None:
            ox, oy = off
            W = np.roll(np.roll(S3, -oy, axis=0), -ox, axis=1).reshape(n, -1)
        else:
            W = np.roll(states, -off, axis=0)
        norms += np.einsum("nt,nt->n", W, W)
    norms = np.maximum(np.sqrt(norms), NORM_FLOOR)

    XtX = np.empty((n, p, p))
    Xty = np.empty((n, p))
    for a in range(p):
        Xty[:, a] = np.einsum("nt,nt->n", cols[a], y)
        for b in range(a, p):
            XtX[:, a, b] = XtX[:, b, a] = np.einsum("nt,nt->n", cols[a], cols[b])
    XtX /= norms[:, None, None] ** 2
    Xty /= norms[:, None] ** 2
    return XtX, Xty, norms


def _assemble_model(theta: np.ndarray, layout: FeatureLayout, params: CaseParams,
                    method: str, diagnostics: dict, config: dict) -> LearnedModel:
    physical = layout.extract_physical(theta)
    operators = {
        name: assemble_uniform(block.stencil, coeffs, params.grid.n,
                               shape=layout.grid_shape)
        for (name, coeffs), block in zip(physical.items(), layout.blocks)
    }
    return LearnedModel(case=params.case, method=method, operators=operators,
                        layout=layout, params=params, diagnostics=diagnostics,
                        config=config)


def learn_model(snap: SnapshotSet, params: CaseParams, method: str, sizes,
                ridge: RidgeConfig | None = None, tol: float = DEFAULT_TOL,
                margin: float | None = None, equilibrium: float | None = None,
                max_iter: int = 500, threads: int = 1) -> LearnedModel:
    """Build, normalize, and solve one problem per DOF; assemble the rows.

    ``sizes`` holds one stencil size per operator block of the case. Any
    per-DOF solver failure aborts with the DOF index.
    """
    if method not in ("LDO", "S-LDO"):
        raise ValueError(f"method must be 'LDO' or 'S-LDO', got {method!r}")
    sizes = (sizes,) if np.isscalar(sizes) else tuple(sizes)
    if len(sizes) != n_stencils(params.case):
        raise ValueError(f"case {params.case!r} takes {n_stencils(params.case)} stencil size(s)")
    layout = layout_for_case(params, sizes)
    XtX, Xty, norms = _normal_equation_batches(snap, layout)
    n, p = snap.n, layout.p

    config = {"sizes": sizes, "tol": tol, "warm_start": "clipped-unconstrained"}

    if method == "LDO":
        cfg = ridge if ridge is not None else RidgeConfig()
        config.update(beta1=cfg.beta1, beta2=cfg.beta2, penalty_scaling=cfg.scaling)
        diag = cfg.penalty_diagonal(layout)
        theta = np.empty((n, p))
        if np.all(diag == 0.0):
            # Unregularized: orthogonal least squares per DOF (see solve_ldo).
            from .features import build_normalized_problem

            for i in range(n):
                prob = build_normalized_problem(snap, i, layout)
                theta[i] = solve_ldo(prob, cfg)
        else:
            systems = XtX + np.diag(diag)
            try:
                np.linalg.cholesky(systems)
                theta = np.linalg.solve(systems, Xty[..., None])[..., 0]
            except np.linalg.LinAlgError:
                for i in range(n):  # identify the offending DOF
                    try:
                        c, low = sla.cho_factor(systems[i])
                        theta[i] = sla.cho_solve((c, low), Xty[i])
                    except np.linalg.LinAlgError as exc:
                        raise SingularProblemError(i) from exc
        diagnostics = {"status": np.full(n, "ridge", dtype=object),
                       "iterations": np.zeros(n, dtype=int),
                       "kkt_residual": np.zeros(n)}
        return _assemble_model(theta, layout, params, method, diagnostics, config)

    spec = default_constraint_spec(params, snap=snap, margin=margin,
                                   equilibrium=equilibrium)
    config.update(margin=spec.margin, equilibrium=spec.equilibrium,
                  constraint_mode=spec.mode)
    block = build_stability_constraints(spec, layout)
    lift = _lift_direction(spec, layout)

    theta = np.empty((n, p))
    status = np.empty(n, dtype=object)
    iterations = np.zeros(n, dtype=int)
    kkt = np.zeros(n)

    def solve_one(i):
        return _solve_sldo_normal(XtX[i], Xty[i], layout, spec, tol=tol,
                                  max_iter=max_iter, dof=i, block=block, lift=lift)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve_one, range(n)))
    else:
        results = [solve_one(i) for i in range(n)]
    for i, (th, diag) in enumerate(results):
        theta[i] = th
        status[i] = diag["status"]
        iterations[i] = diag["iterations"]
        kkt[i] = diag["kkt_residual"]

    diagnostics = {"status": status, "iterations": iterations, "kkt_residual": kkt}
    return _assemble_model(theta, layout, params, "S-LDO", diagnostics, config)
