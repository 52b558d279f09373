"""Convex quadratic programs with linear inequality constraints.

This is the workhorse behind the stability-constrained regressions: each
per-DOF problem becomes ``min 1/2 x'Hx + g'x  s.t.  Gx <= h`` after the
diagonal-dominance constraint (an absolute-value inequality) is rewritten
with one slack variable per off-center coefficient.

The solver is a primal active-set method: iterates stay feasible, so the
returned point satisfies the constraints to factorization accuracy, and
warm starts from the per-DOF unconstrained solution usually finish in a
handful of iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class QuadraticProgram:
    """min 1/2 x' H x + g' x  subject to  G x <= h."""

    H: np.ndarray
    g: np.ndarray
    G: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=float)
        g = np.asarray(self.g, dtype=float)
        G = np.asarray(self.G, dtype=float)
        h = np.asarray(self.h, dtype=float)
        for name, val in (("H", H), ("g", g), ("G", G), ("h", h)):
            object.__setattr__(self, name, val)
        p = g.shape[0]
        if H.shape != (p, p):
            raise DimensionError(f"H has shape {H.shape}, expected ({p}, {p})")
        scale = max(1.0, float(np.abs(H).max()))
        if np.abs(H - H.T).max() > 1e-10 * scale:
            raise DimensionError("H must be symmetric (within 1e-10 relative)")
        if G.size and (G.ndim != 2 or G.shape[1] != p or h.shape != (G.shape[0],)):
            raise DimensionError(f"constraints G {G.shape}, h {h.shape} inconsistent with p={p}")

    @property
    def p(self) -> int:
        return self.g.shape[0]

    @property
    def m(self) -> int:
        return self.G.shape[0] if self.G.size else 0

    def objective(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.H @ x + self.g @ x)


@dataclass(frozen=True)
class QPSolution:
    x: np.ndarray
    kkt_residual: float
    active_set: tuple
    iterations: int
    status: str  # "optimal" | "max-iter" | "numerical-failure"


# Absolute-value reformulation ================================================

@dataclass(frozen=True)
class ConstraintBlock:
    """Linear rows encoding dominance of an affine combination a = M x.

    Variables are [x; t] with one slack t_q per off-center entry of a.
    Rows: +a_j - t_q <= 0, -a_j - t_q <= 0 for each off-center j, and the
    aggregate sum(t) - a_center <= -margin.
    """

    G: np.ndarray
    h: np.ndarray
    n_decision: int
    n_slack: int
    center: int
    combination: np.ndarray  # (m_comb, n_decision) map from x to a
    margin: float

    def slacks_for(self, x: np.ndarray) -> np.ndarray:
        """Minimal feasible slacks at a decision point: t_q = |a_j|."""
        a = self.combination @ np.asarray(x, dtype=float)
        return np.abs(np.delete(a, self.center))

    def dominance_margin(self, x: np.ndarray) -> float:
        """a_center - sum |a_offcenter| at a decision point."""
        a = self.combination @ np.asarray(x, dtype=float)
        return float(a[self.center] - np.abs(np.delete(a, self.center)).sum())


def absval_reformulate(p_dim: int, center: int, margin: float = 0.0,
                       combination: np.ndarray | None = None) -> ConstraintBlock:
    """Slack rows for ``a_center >= sum_j |a_j| + margin`` with a = M x.

    ``combination`` defaults to the identity (the decision variables are
    constrained directly); ``center`` indexes into the rows of a.
    """
    if combination is None:
        combination = np.eye(p_dim)
    M = np.asarray(combination, dtype=float)
    if M.ndim != 2 or M.shape[1] != p_dim:
        raise DimensionError(f"combination map {M.shape} inconsistent with p={p_dim}")
    m_comb = M.shape[0]
    if not 0 <= center < m_comb:
        raise DimensionError(f"center {center} out of range for {m_comb} combination rows")
    if margin < 0:
        raise ValueError("margin must be nonnegative")

    off_rows = [j for j in range(m_comb) if j != center]
    n_slack = len(off_rows)
    n_var = p_dim + n_slack
    G = np.zeros((2 * n_slack + 1, n_var))
    h = np.zeros(2 * n_slack + 1)
    for q, j in enumerate(off_rows):
        G[2 * q, :p_dim] = M[j]
        G[2 * q, p_dim + q] = -1.0
        G[2 * q + 1, :p_dim] = -M[j]
        G[2 * q + 1, p_dim + q] = -1.0
    G[-1, :p_dim] = -M[center]
    G[-1, p_dim:] = 1.0
    h[-1] = -margin
    return ConstraintBlock(G=G, h=h, n_decision=p_dim, n_slack=n_slack,
                           center=center, combination=M, margin=margin)


def extend_hessian(H: np.ndarray, n_slack: int, eps_rel: float = 1e-12) -> np.ndarray:
    """Pad H with a tiny diagonal block for the slack variables.

    The objective has no slack curvature; the pad keeps working-set KKT
    systems nonsingular and selects the minimal slacks, perturbing the
    decision variables far below solver tolerance.
    """
    H = np.asarray(H, dtype=float)
    p = H.shape[0]
    eps = eps_rel * max(1.0, float(np.abs(np.diag(H)).max()) if p else 1.0)
    out = np.zeros((p + n_slack, p + n_slack))
    out[:p, :p] = H
    out[p:, p:] = eps * np.eye(n_slack)
    return out


# Active-set solver ===========================================================

def _solve_kkt(H, g, A, b):
    """Equality-constrained QP optimum: min 1/2 x'Hx + g'x s.t. A x = b."""
    p = H.shape[0]
    m = A.shape[0] if A is not None and len(A) else 0
    if m == 0:
        return np.linalg.solve(H, -g), np.empty(0)
    K = np.zeros((p + m, p + m))
    K[:p, :p] = H
    K[:p, p:] = A.T
    K[p:, :p] = A
    rhs = np.concatenate([-g, b])
    sol = np.linalg.solve(K, rhs)
    return sol[:p], sol[p:]


def _solve_kkt_regularized(H, g, A, b, reg):
    p = H.shape[0]
    m = A.shape[0] if A is not None and len(A) else 0
    Hr = H + reg * np.eye(p)
    if m == 0:
        return np.linalg.solve(Hr, -g), np.empty(0)
    K = np.zeros((p + m, p + m))
    K[:p, :p] = Hr
    K[:p, p:] = A.T
    K[p:, :p] = A
    K[p:, p:] = -reg * np.eye(m)
    rhs = np.concatenate([-g, b])
    sol = np.linalg.solve(K, rhs)
    return sol[:p], sol[p:]


def _kkt_residual(qp: QuadraticProgram, x, working, lam) -> float:
    stat = qp.H @ x + qp.g
    if len(working):
        stat = stat + qp.G[working].T @ lam
    res = float(np.abs(stat).max())
    if qp.m:
        res = max(res, float(np.max(qp.G @ x - qp.h, initial=0.0)))
    if len(working):
        res = max(res, float(np.max(-lam, initial=0.0)))
        res = max(res, float(np.abs(lam * (qp.G[working] @ x - qp.h[working])).max(initial=0.0)))
    return res


def qp_solve(qp: QuadraticProgram, tol: float = 1e-6, max_iter: int = 500,
             x0: np.ndarray | None = None) -> QPSolution:
    """Primal active-set method for a convex QP with inequality constraints.

    ``x0`` must be feasible when supplied (the dominance blocks always admit
    one: lift the center coefficient); the origin is tried otherwise.
    Iterates remain feasible throughout, so even a ``max-iter`` exit returns
    a usable point. Singular working-set systems fall back to one
    regularized re-solve before reporting ``numerical-failure``.
    """
    p = qp.p
    x = np.zeros(p) if x0 is None else np.asarray(x0, dtype=float).copy()
    if x.shape != (p,):
        raise DimensionError(f"x0 has shape {x.shape}, expected ({p},)")
    feas_tol = 1e-9 * (1.0 + float(np.abs(qp.h).max()) if qp.m else 1.0)
    if qp.m and np.max(qp.G @ x - qp.h) > feas_tol:
        raise ValueError("qp_solve requires a feasible starting point")

    working: list[int] = []
    lam = np.empty(0)
    reg_scale = 1e-10 * (1.0 + float(np.abs(qp.H).max()))
    lam_drop_tol = 1e-9 * (1.0 + float(np.abs(qp.g).max()))

    iterations = 0
    for iterations in range(1, max_iter + 1):
        A = qp.G[working] if working else None
        b = qp.h[working] if working else None
        try:
            x_star, lam = _solve_kkt(qp.H, qp.g, A, b)
            if not np.all(np.isfinite(x_star)):
                raise np.linalg.LinAlgError("non-finite KKT solution")
        except np.linalg.LinAlgError:
            try:
                x_star, lam = _solve_kkt_regularized(qp.H, qp.g, A, b, reg_scale)
                if not np.all(np.isfinite(x_star)):
                    raise np.linalg.LinAlgError("non-finite KKT solution")
            except np.linalg.LinAlgError:
                return QPSolution(x=x, kkt_residual=np.inf, active_set=tuple(working),
                                  iterations=iterations, status="numerical-failure")

        step = x_star - x
        if np.abs(step).max(initial=0.0) <= 1e-12 * (1.0 + np.abs(x).max(initial=0.0)):
            if not working or lam.min() >= -lam_drop_tol:
                lam_clip = np.maximum(lam, 0.0) if len(lam) else lam
                res = _kkt_residual(qp, x, working, lam_clip)
                status = "optimal" if res <= tol else "max-iter"
                return QPSolution(x=x, kkt_residual=res, active_set=tuple(working),
                                  iterations=iterations, status=status)
            working.pop(int(np.argmin(lam)))
            continue

        # Ratio test against constraints outside the working set.
        alpha = 1.0
        blocking = -1
        if qp.m:
            Gp = qp.G @ step
            slack = qp.h - qp.G @ x
            for j in range(qp.m):
                if j in working or Gp[j] <= 1e-14 * (1.0 + abs(slack[j])):
                    continue
                ratio = max(slack[j], 0.0) / Gp[j]
                if ratio < alpha - 1e-15:
                    alpha = max(ratio, 0.0)
                    blocking = j
        x = x + alpha * step
        if blocking >= 0 and alpha < 1.0:
            working.append(blocking)

    lam_clip = np.maximum(lam, 0.0) if len(lam) else lam
    res = _kkt_residual(qp, x, working, lam_clip)
    return QPSolution(x=x, kkt_residual=res, active_set=tuple(working),
                      iterations=iterations, status="max-iter" if res > tol else "optimal")
