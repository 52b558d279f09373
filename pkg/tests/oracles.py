"""Independent reference implementations that the tests check against.

Everything here is deliberately naive (index loops, dense scans, pattern
search) and shares no code with the package's computational paths.
"""

from __future__ import annotations

import numpy as np


def burgers_rhs_loop(u, nu, dx):
    """Per-index evaluation of the discrete viscous transport right-hand side."""
    n = len(u)
    out = np.empty(n)
    for i in range(n):
        up = u[(i + 1) % n]
        um = u[(i - 1) % n]
        out[i] = -u[i] * (up - um) / (2.0 * dx) + nu * (up - 2.0 * u[i] + um) / dx**2
    return out


def forward_euler_loop(rhs_fn, u0, dt, steps):
    """Straight-line re-implementation of the explicit update."""
    u = np.array(u0, dtype=float)
    out = [u.copy()]
    for _ in range(steps):
        u = u + dt * rhs_fn(u)
        out.append(u.copy())
    return np.array(out).T


def relative_error_loop(U, Um):
    """Two-loop instantaneous relative error series."""
    n, n_t = U.shape
    out = np.empty(n_t)
    for j in range(n_t):
        num = 0.0
        den = 0.0
        for i in range(n):
            num += (U[i, j] - Um[i, j]) ** 2
            den += U[i, j] ** 2
        out[j] = num / den
    return out


def total_error_loop(U, Um):
    """Elementwise Frobenius ratio."""
    num = 0.0
    den = 0.0
    n, n_t = U.shape
    for i in range(n):
        for j in range(n_t):
            num += (U[i, j] - Um[i, j]) ** 2
            den += U[i, j] ** 2
    return np.sqrt(num) / np.sqrt(den)


def training_error_loop(states, rhs, form_rows, offsets):
    """Triple-loop residual sum for a uniform-stencil modeled form.

    form_rows[i] holds the right-hand-side combination row of DOF i, so the
    model reads du_i/dt = -(form_rows[i] . u window).
    """
    n, n_t = states.shape
    total = 0.0
    for j in range(n_t):
        for i in range(n):
            acc = 0.0
            for k, off in enumerate(offsets):
                acc += form_rows[i][k] * states[(i + off) % n, j]
            total += (rhs[i, j] + acc) ** 2
    return total


def quadratic_rhs_jacobian(N, L, nu, u, dx_offsets):
    """Numerical Jacobian of the modeled transport right-hand side at u.

    The modeled form is du_i/dt = -(N . z_i) + nu*(L . u_window) with
    z_{i,k} = u_i * u_{i+k}; central differences, step 1e-6.
    """
    n = len(u)
    offsets = dx_offsets

    def rhs(v):
        out = np.empty(n)
        for i in range(n):
            zn = sum(N[k] * v[i] * v[(i + o) % n] for k, o in enumerate(offsets))
            zl = sum(L[k] * v[(i + o) % n] for k, o in enumerate(offsets))
            out[i] = -(zn) + nu * zl
        return out

    h = 1e-6
    J = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        J[:, j] = (rhs(u + e) - rhs(u - e)) / (2 * h)
    return J


# Constrained QP oracle =======================================================

def _clip_center(v, center, margin):
    """Map a free vector onto the dominance-feasible set by lifting the center."""
    x = np.array(v, dtype=float)
    off = np.abs(np.delete(x, center)).sum()
    if x[center] < off + margin:
        x[center] = off + margin
    return x


def dominance_qp_oracle(H, g, center, margin=0.0, span=3.0, coarse=9):
    """Brute-force minimizer of 1/2 x'Hx + g'x over the dominance cone.

    Dense grid scan over the free parameterization (off-center coordinates
    plus an unconstrained center that gets clipped up to feasibility),
    followed by shrinking-step coordinate pattern search. Independent of the
    package's solver; accuracy ~1e-8 in the objective.
    """
    p = len(g)

    def objective(v):
        x = _clip_center(v, center, margin)
        return 0.5 * x @ H @ x + g @ x, x

    # Coarse scan.
    axes = [np.linspace(-span, span, coarse)] * p
    best_f = np.inf
    best_v = np.zeros(p)
    for point in np.stack(np.meshgrid(*axes), axis=-1).reshape(-1, p):
        f, _ = objective(point)
        if f < best_f:
            best_f, best_v = f, point.copy()

    # Pattern search refinement.
    step = 2 * span / (coarse - 1)
    v = best_v
    while step > 1e-9:
        improved = False
        for j in range(p):
            for sgn in (+1.0, -1.0):
                trial = v.copy()
                trial[j] += sgn * step
                f, _ = objective(trial)
                if f < best_f - 1e-15:
                    best_f, v, improved = f, trial, True
        if not improved:
            step *= 0.5
    return objective(v)[1], best_f
