"""Forecasting with learned models and the error metrics reported for them.

Forecasts integrate the learned semi-discrete form with the same forward
Euler scheme used to generate the training data. Unstable learned operators
are expected to diverge; a blow-up guard flags (rather than aborts) the run
and keeps the partial trajectory so error curves can still be plotted up to
the failure step.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .learn import LearnedModel
from .operators import AssembledOperator
from .simulate import SnapshotMeta, SnapshotSet

BLOWUP_GUARD = 1e6


@dataclass(frozen=True)
class ErrorReport:
    """Instantaneous and total forecast errors against a reference."""

    times: np.ndarray
    e_u: np.ndarray                # relative instantaneous error per time
    eps_xt: float                  # total space-time relative error
    e_train: float | None          # training residual, when computed
    train_end: float               # boundary between training and extrapolation
    blowup_step: int | None = None
    undefined_at: tuple = ()

    @property
    def flagged(self) -> bool:
        return self.blowup_step is not None


# Integration =================================================================

def integrate_model(model: LearnedModel, u0: np.ndarray, dt: float, steps: int,
                    guard: float = BLOWUP_GUARD) -> SnapshotSet:
    """Forward Euler on the learned semi-discrete form.

    A state whose max-norm exceeds ``guard`` flags the trajectory (recorded
    in the metadata with the offending step) and integration stops there;
    the stored columns up to the flag remain valid.
    """
    u = np.asarray(u0, dtype=float).copy()
    n = u.shape[0]
    if n != model.grid.n:
        raise DimensionError(f"initial state has {n} DOFs, model expects {model.grid.n}")

    # Linear cases integrate du/dt = -F u with the assembled combination;
    # the transport case re-applies the quadratic feature map each step.
    if model.case == "burgers":
        N, L = model.operators["N"], model.operators["L"]
        nu = model.params.nu
        rhs = lambda v: -v * N.apply(v) + nu * L.apply(v)
    else:
        F = model.form_operator()
        rhs = lambda v: -F.apply(v)

    states = np.empty((n, steps + 1))
    rhs_store = np.empty((n, steps + 1))
    blowup_step = None
    k = 0
    for k in range(steps + 1):
        bad = not np.all(np.isfinite(u)) or np.abs(u).max() > guard
        if bad:
            blowup_step = k
            break
        states[:, k] = u
        du = rhs(u)
        rhs_store[:, k] = du
        if k < steps:
            u = u + dt * du
    stored = k if blowup_step is not None else steps + 1
    meta = SnapshotMeta(case=model.case, grid=model.grid, dt=dt,
                        seed=model.params.seed, rhs_source="exact",
                        params={"method": model.method}, blowup_step=blowup_step)
    times = np.arange(stored) * dt
    return SnapshotSet(times=times, states=states[:, :stored],
                       rhs=rhs_store[:, :stored], meta=meta)


# Error metrics ===============================================================

def relative_error_series(ref: SnapshotSet, model_traj: SnapshotSet):
    """e_u(t) = ||u(t) - u_m(t)||^2 / ||u(t)||^2 on the common time range.

    Returns (times, e_u, undefined): times where the reference norm vanishes
    are flagged undefined and carry NaN.
    """
    n_common = min(ref.n_t, model_traj.n_t)
    if ref.n != model_traj.n:
        raise DimensionError("reference and model trajectories differ in DOF count")
    if not np.allclose(ref.times[:n_common], model_traj.times[:n_common], rtol=1e-12, atol=1e-12):
        raise DimensionError("trajectories are not aligned in time")
    U = ref.states[:, :n_common]
    Um = model_traj.states[:, :n_common]
    num = np.einsum("nt,nt->t", U - Um, U - Um)
    den = np.einsum("nt,nt->t", U, U)
    undefined = den == 0.0
    e_u = np.full(n_common, np.nan)
    e_u[~undefined] = num[~undefined] / den[~undefined]
    return ref.times[:n_common], e_u, tuple(np.nonzero(undefined)[0])


def total_error(ref: SnapshotSet, model_traj: SnapshotSet) -> float:
    """Frobenius-norm ratio ||U - U_m||_F / ||U||_F over full trajectories.

    A blow-up-flagged model trajectory reports inf (the undefined cells of
    the published error maps) rather than comparing truncated shapes.
    """
    if model_traj.meta.blowup_step is not None or model_traj.n_t < ref.n_t:
        return np.inf
    if model_traj.n_t > ref.n_t:
        raise DimensionError("model trajectory extends past the reference")
    U, Um = ref.states, model_traj.states
    den = np.linalg.norm(U)
    if den == 0.0:
        raise DimensionError("reference trajectory is identically zero")
    return float(np.linalg.norm(U - Um) / den)


def training_error(snap: SnapshotSet, model: LearnedModel) -> float:
    """Sum of squared semi-discrete residuals of the model over the data."""
    if snap.n != model.grid.n:
        raise DimensionError("snapshots and model disagree on DOF count")
    if model.case == "burgers":
        N, L = model.operators["N"], model.operators["L"]
        nu = model.params.nu
        model_rhs = -snap.states * N.apply_columns(snap.states) \
            + nu * L.apply_columns(snap.states)
    else:
        model_rhs = -model.form_operator().apply_columns(snap.states)
    resid = snap.rhs - model_rhs
    return float(np.einsum("nt,nt->", resid, resid))


def averaged_stencil(model_or_operator, dx: float) -> np.ndarray:
    """Mean coefficient per offset across DOFs, scaled by dx.

    Accepts a 1-D assembled operator or a single-operator 1-D model; learned
    stencils recovered this way compare directly against the reference rows.
    """
    if isinstance(model_or_operator, AssembledOperator):
        op = model_or_operator
    else:
        model = model_or_operator
        if len(model.operators) != 1:
            raise DimensionError("averaged stencil needs a single-operator model")
        (op,) = model.operators.values()
    if op.uniform_stencil is None:
        raise DimensionError("averaged stencil requires one shared stencil")
    if op.uniform_stencil.is_2d:
        raise DimensionError("averaged stencil is defined for 1-D operators")
    return op.coefficient_matrix().mean(axis=0) * dx


def error_report(ref: SnapshotSet, model_traj: SnapshotSet, train_end: float,
                 snap: SnapshotSet | None = None,
                 model: LearnedModel | None = None) -> ErrorReport:
    """Bundle the error metrics for one forecast run."""
    times, e_u, undefined = relative_error_series(ref, model_traj)
    e_train = training_error(snap, model) if snap is not None and model is not None else None
    return ErrorReport(times=times, e_u=e_u, eps_xt=total_error(ref, model_traj),
                       e_train=e_train, train_end=train_end,
                       blowup_step=model_traj.meta.blowup_step, undefined_at=undefined)


def write_error_series_csv(report: ErrorReport, path) -> None:
    """`t,e_u` rows for one run."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "e_u"])
        for t, e in zip(report.times, report.e_u):
            writer.writerow([f"{t:.17g}", f"{e:.17g}"])
