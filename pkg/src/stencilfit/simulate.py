"""Reference discretizations and forward-Euler snapshot generation.

The reference semi-discrete forms (the data generators) follow first-order
backward differences for advective terms and second-order centered
differences for diffusive terms, on periodic grids. Trajectories record the
exact right-hand side at every stored time so downstream regressions can be
checked against the generator without finite-difference noise; a
finite-difference extraction of the time derivative is kept as an optional
robustness path.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import BlowUpError, DimensionError, InsufficientDataError
from .grids import Grid1D, Grid2D
from .operators import (
    AssembledOperator,
    assemble_uniform,
    make_axis_stencil,
    make_centered_stencil,
)
from .rng import stream

CASES = ("diffusion", "advection", "advection-diffusion", "burgers", "advection2d")


# Snapshot containers =========================================================

@dataclass(frozen=True)
class SnapshotMeta:
    """Provenance of a snapshot set: case, physics, grid, and sampling."""

    case: str
    grid: object
    dt: float
    seed: int | None = None
    rhs_source: str = "exact"
    params: dict = field(default_factory=dict)
    blowup_step: int | None = None


@dataclass(frozen=True)
class SnapshotSet:
    """Time-stamped states and their time derivatives.

    ``states`` and ``rhs`` are (n, n_t); column j belongs to ``times[j]``.
    """

    times: np.ndarray
    states: np.ndarray
    rhs: np.ndarray
    meta: SnapshotMeta

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        rhs = np.asarray(self.rhs, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "rhs", rhs)
        if states.ndim != 2 or rhs.shape != states.shape or times.shape != (states.shape[1],):
            raise DimensionError(
                f"inconsistent snapshot shapes: states {states.shape}, "
                f"rhs {rhs.shape}, times {times.shape}"
            )
        if times.size >= 2:
            steps = np.diff(times)
            if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-12, atol=1e-14):
                raise DimensionError("times must increase with uniform spacing")

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def n_t(self) -> int:
        return self.states.shape[1]


@dataclass(frozen=True)
class CaseParams:
    """Physical and sampling parameters of one data-generation case."""

    case: str
    grid: object
    dt: float
    n_snapshots: int
    seed: int = 0
    c: float = 0.0
    nu: float = 0.0
    cx: float = 0.0
    cy: float = 0.0
    pulse_center: float = 2.5
    pulse_width: float = 0.5

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; expected one of {CASES}")
        if self.nu < 0:
            raise ValueError("diffusivity must be nonnegative")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_snapshots < 2:
            raise ValueError("need at least 2 snapshots")


# Reference operators =========================================================

def reference_operator_1d(grid: Grid1D, c: float = 0.0, nu: float = 0.0):
    """Backward-difference advection and centered diffusion stencils.

    Returns (L1, L2) with rows [-1, 1, 0]/dx and [1, -2, 1]/dx^2 on offsets
    (-1, 0, 1). The physical constants are not folded in.
    """
    stencil = make_centered_stencil(3)
    dx = grid.dx
    L1 = assemble_uniform(stencil, np.array([-1.0, 1.0, 0.0]) / dx, grid.n)
    L2 = assemble_uniform(stencil, np.array([1.0, -2.0, 1.0]) / dx**2, grid.n)
    return L1, L2


def reference_operator_2d(grid: Grid2D):
    """Backward differences along x and y on the flattened row-major grid."""
    sx = make_axis_stencil(3, "x")
    sy = make_axis_stencil(3, "y")
    Lx = assemble_uniform(sx, np.array([-1.0, 1.0, 0.0]) / grid.dx, grid.n, shape=grid.shape)
    Ly = assemble_uniform(sy, np.array([-1.0, 1.0, 0.0]) / grid.dy, grid.n, shape=grid.shape)
    return Lx, Ly


def burgers_reference_operators(grid: Grid1D):
    """Centered quadratic-transport and diffusion stencils for the Burgers case."""
    stencil = make_centered_stencil(3)
    dx = grid.dx
    N = assemble_uniform(stencil, np.array([-1.0, 0.0, 1.0]) / (2 * dx), grid.n)
    L = assemble_uniform(stencil, np.array([1.0, -2.0, 1.0]) / dx**2, grid.n)
    return N, L


def burgers_rhs(u: np.ndarray, nu: float, grid: Grid1D) -> np.ndarray:
    """du/dt for the viscous Burgers semi-discrete form.

    rhs_i = -u_i (u_{i+1} - u_{i-1}) / (2 dx) + nu (u_{i+1} - 2 u_i + u_{i-1}) / dx^2
    """
    u = np.asarray(u, dtype=float)
    dx = grid.dx
    up = np.roll(u, -1)
    um = np.roll(u, 1)
    return -u * (up - um) / (2 * dx) + nu * (up - 2 * u + um) / dx**2


# Initial conditions ==========================================================

def initial_condition(params: CaseParams) -> np.ndarray:
    """Case-specific initial state (flattened for 2-D)."""
    if params.case == "burgers":
        rng = stream(params.seed, "data")
        return rng.normal(loc=0.3, scale=0.2, size=params.grid.n)
    if params.case == "advection2d":
        X, Y = params.grid.meshgrid()
        return np.exp(-((X - 2.0) ** 2 + (Y - 5.0) ** 2)).ravel()
    x = params.grid.x
    return np.exp(-((x - params.pulse_center) ** 2) / (2 * params.pulse_width**2))


# Time integration ============================================================

def forward_euler(
    rhs_fn: Callable[[np.ndarray], np.ndarray],
    u0: np.ndarray,
    dt: float,
    steps: int,
    meta: SnapshotMeta | None = None,
) -> SnapshotSet:
    """Integrate u' = rhs(u) with forward Euler, storing states and exact rhs.

    Stores ``steps + 1`` columns (the initial state included); the rhs column
    at the final time is an extra evaluation so every stored state carries
    its exact derivative. Raises :class:`BlowUpError` if the state goes
    non-finite (data generation must not silently produce garbage).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    u = np.asarray(u0, dtype=float).copy()
    n = u.shape[0]
    states = np.empty((n, steps + 1))
    rhs = np.empty((n, steps + 1))
    for k in range(steps + 1):
        if not np.all(np.isfinite(u)):
            raise BlowUpError(k)
        states[:, k] = u
        du = rhs_fn(u)
        rhs[:, k] = du
        if k < steps:
            u = u + dt * du
    times = np.arange(steps + 1) * dt
    if meta is None:
        meta = SnapshotMeta(case="custom", grid=None, dt=dt, rhs_source="exact")
    return SnapshotSet(times=times, states=states, rhs=rhs, meta=meta)


def fd_time_derivative(states: np.ndarray, dt: float) -> np.ndarray:
    """Second-order finite-difference du/dt along the time axis.

    Central differences in the interior, one-sided 3-point stencils at the
    first and last columns; exact for trajectories quadratic in time.
    """
    states = np.asarray(states, dtype=float)
    if states.ndim != 2 or states.shape[1] < 3:
        raise InsufficientDataError("need at least 3 snapshot columns for 2nd-order differences")
    dudt = np.empty_like(states)
    dudt[:, 1:-1] = (states[:, 2:] - states[:, :-2]) / (2 * dt)
    dudt[:, 0] = (-3 * states[:, 0] + 4 * states[:, 1] - states[:, 2]) / (2 * dt)
    dudt[:, -1] = (3 * states[:, -1] - 4 * states[:, -2] + states[:, -3]) / (2 * dt)
    return dudt


def with_fd_rhs(snap: SnapshotSet) -> SnapshotSet:
    """Copy of a snapshot set with rhs re-extracted by finite differences."""
    dudt = fd_time_derivative(snap.states, snap.meta.dt)
    return replace(snap, rhs=dudt, meta=replace(snap.meta, rhs_source="finite-difference"))


# Case-level generation =======================================================

def case_rhs_function(params: CaseParams) -> Callable[[np.ndarray], np.ndarray]:
    """Reference right-hand side for one case."""
    if params.case == "diffusion":
        _, L2 = reference_operator_1d(params.grid)
        return lambda u: params.nu * L2.apply(u)
    if params.case == "advection":
        L1, _ = reference_operator_1d(params.grid)
        return lambda u: -params.c * L1.apply(u)
    if params.case == "advection-diffusion":
        L1, L2 = reference_operator_1d(params.grid)
        return lambda u: -params.c * L1.apply(u) + params.nu * L2.apply(u)
    if params.case == "burgers":
        return lambda u: burgers_rhs(u, params.nu, params.grid)
    if params.case == "advection2d":
        Lx, Ly = reference_operator_2d(params.grid)
        return lambda u: -params.cx * Lx.apply(u) - params.cy * Ly.apply(u)
    raise ValueError(f"unknown case {params.case!r}")


def generate_case(params: CaseParams, rhs_source: str = "exact") -> SnapshotSet:
    """Generate the training snapshot set for one case."""
    physics = {k: getattr(params, k) for k in ("c", "nu", "cx", "cy")}
    physics.update(pulse_center=params.pulse_center, pulse_width=params.pulse_width)
    meta = SnapshotMeta(
        case=params.case,
        grid=params.grid,
        dt=params.dt,
        seed=params.seed,
        rhs_source="exact",
        params=physics,
    )
    snap = forward_euler(
        case_rhs_function(params),
        initial_condition(params),
        params.dt,
        steps=params.n_snapshots - 1,
        meta=meta,
    )
    if rhs_source == "finite-difference":
        snap = with_fd_rhs(snap)
    elif rhs_source != "exact":
        raise ValueError("rhs_source must be 'exact' or 'finite-difference'")
    return snap


# Persistence =================================================================

def save_snapshots(snap: SnapshotSet, directory) -> None:
    """states.csv + rhs.csv (wide: dof rows, timestamp header) + meta.txt."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, mat in (("states", snap.states), ("rhs", snap.rhs)):
        with open(directory / f"{name}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dof"] + [f"{t:.17g}" for t in snap.times])
            for i in range(snap.n):
                writer.writerow([i] + [f"{v:.17g}" for v in mat[i]])
    meta = snap.meta
    lines = [f"case = {meta.case}", f"dt = {meta.dt:.17g}", f"rhs_source = {meta.rhs_source}"]
    if meta.seed is not None:
        lines.append(f"seed = {meta.seed}")
    grid = meta.grid
    if isinstance(grid, Grid1D):
        lines += [f"n = {grid.n}", f"length = {grid.length:.17g}"]
    elif isinstance(grid, Grid2D):
        lines += [f"nx = {grid.nx}", f"ny = {grid.ny}", f"lx = {grid.lx:.17g}", f"ly = {grid.ly:.17g}"]
    for key in sorted(meta.params):
        lines.append(f"{key} = {meta.params[key]:.17g}")
    if meta.blowup_step is not None:
        lines.append(f"blowup_step = {meta.blowup_step}")
    (directory / "meta.txt").write_text("\n".join(lines) + "\n")


def load_snapshots(directory) -> SnapshotSet:
    """Inverse of :func:`save_snapshots`."""
    from pathlib import Path

    directory = Path(directory)
    fields = {}
    for line in (directory / "meta.txt").read_text().splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()

    if "n" in fields:
        grid = Grid1D(n=int(fields["n"]), length=float(fields["length"]))
    else:
        grid = Grid2D(nx=int(fields["nx"]), ny=int(fields["ny"]),
                      lx=float(fields["lx"]), ly=float(fields["ly"]))
    params = {
        k: float(fields[k])
        for k in ("c", "nu", "cx", "cy", "pulse_center", "pulse_width")
        if k in fields
    }
    meta = SnapshotMeta(
        case=fields["case"],
        grid=grid,
        dt=float(fields["dt"]),
        seed=int(fields["seed"]) if "seed" in fields else None,
        rhs_source=fields["rhs_source"],
        params=params,
        blowup_step=int(fields["blowup_step"]) if "blowup_step" in fields else None,
    )

    def read_wide(path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            times = np.array([float(t) for t in header[1:]])
            data = sorted((int(rec[0]), [float(v) for v in rec[1:]]) for rec in reader)
        return times, np.array([vals for _, vals in data])

    times, states = read_wide(directory / "states.csv")
    _, rhs = read_wide(directory / "rhs.csv")
    return SnapshotSet(times=times, states=states, rhs=rhs, meta=meta)
