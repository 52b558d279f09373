"""Per-DOF regression problems: stencil gathers, quadratic features, scaling.

Each learning case is described by a :class:`FeatureLayout`: an ordered list
of coefficient blocks (linear gathers of the local solution window, or
quadratic products u_i * u_{i+k} for the transport nonlinearity) plus a
target sign. The design matrix holds the raw gathered features; known
physical constants stay folded into the stored coefficients and are divided
out when the physical stencils are extracted (each block records that factor
in ``scale``).

With target sign s, the problem ``min ||X theta - y||`` with ``y = -s * du/dt``
fits the semi-discrete model du/dt + s * (sum of block terms) = 0, so the
row of the modeled right-hand-side combination is s * (stored blocks summed
on the union stencil).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError
from .operators import StencilSpec, union_stencil
from .simulate import SnapshotSet

NORM_FLOOR = 1e-12


@dataclass(frozen=True)
class FeatureBlock:
    """One coefficient block of a regression problem.

    ``scale`` relates stored coefficients to the physical stencil
    (stored = scale * physical); ``nondim`` is the natural magnitude of the
    stored coefficients (|scale| / dx^order), used when ridge penalties are
    expressed on the dimensionless stencil.
    """

    name: str
    kind: str  # "linear" | "quadratic"
    stencil: StencilSpec
    scale: float
    nondim: float

    def __post_init__(self):
        if self.kind not in ("linear", "quadratic"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.scale == 0:
            raise ValueError(f"block {self.name!r} has zero physical scale")
        if not self.nondim > 0:
            raise ValueError(f"block {self.name!r} needs a positive nondim scale")


@dataclass(frozen=True)
class FeatureLayout:
    """Block structure shared by every DOF's regression problem in one case."""

    blocks: tuple
    target_sign: float = 1.0
    grid_shape: tuple | None = None  # (ny, nx) when offsets are 2-D pairs

    def __post_init__(self):
        if self.target_sign not in (1.0, -1.0):
            raise ValueError("target_sign must be +1 or -1")
        if not self.blocks:
            raise ValueError("layout needs at least one block")

    @property
    def p(self) -> int:
        return sum(b.stencil.size for b in self.blocks)

    def column_slices(self):
        """Column range of each block in the stacked design matrix."""
        slices, start = [], 0
        for b in self.blocks:
            slices.append(slice(start, start + b.stencil.size))
            start += b.stencil.size
        return slices

    @property
    def union(self) -> StencilSpec:
        return union_stencil(*(b.stencil for b in self.blocks))

    def split(self, theta: np.ndarray):
        """Stored coefficient vector -> {block name: block coefficients}."""
        theta = np.asarray(theta)
        return {b.name: theta[..., s] for b, s in zip(self.blocks, self.column_slices())}

    def extract_physical(self, theta: np.ndarray):
        """Stored coefficients -> physical stencil coefficients per block."""
        theta = np.asarray(theta)
        return {
            b.name: theta[..., s] / b.scale
            for b, s in zip(self.blocks, self.column_slices())
        }

    def form_combination_matrix(self) -> np.ndarray:
        """Map stored coefficients to the modeled right-hand-side row.

        Returns M of shape (union size, p): M @ theta is the row of the
        semi-discrete form du/dt + (row . u_window) = 0 on the union stencil.
        Only meaningful when every block is linear.
        """
        if any(b.kind != "linear" for b in self.blocks):
            raise ValueError("combination row is only defined for all-linear layouts")
        union = self.union
        pos = {off: k for k, off in enumerate(union.offsets)}
        M = np.zeros((union.size, self.p))
        for b, cols in zip(self.blocks, self.column_slices()):
            for j, off in enumerate(b.stencil.offsets):
                M[pos[off], cols.start + j] += self.target_sign
        return M


@dataclass(frozen=True)
class RegressionProblem:
    """Design matrix, target, and normalization state for one DOF.

    ``norm`` is the divisor already applied (1.0 when raw); ``window_norm``
    is the Euclidean norm of the union-stencil solution window in the
    problem's current scaling.
    """

    dof: int
    X: np.ndarray
    y: np.ndarray
    layout: FeatureLayout
    norm: float = 1.0
    window_norm: float = 1.0

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise DimensionError(f"X {X.shape} and y {y.shape} are inconsistent")
        if X.shape[1] != self.layout.p:
            raise DimensionError(f"X has {X.shape[1]} columns, layout expects {self.layout.p}")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise DimensionError(f"non-finite regression data at DOF {self.dof}")
        if not self.norm > 0:
            raise DimensionError("norm must be positive")


# Gathering ===================================================================

def gather_window(states: np.ndarray, dof: int, stencil: StencilSpec,
                  grid_shape: tuple | None = None) -> np.ndarray:
    """(n_t, s) window of solution values at the stencil's wrapped columns."""
    n = states.shape[0]
    if stencil.is_2d:
        ny, nx = grid_shape
        ix, iy = dof % nx, dof // nx
        cols = [((iy + oy) % ny) * nx + (ix + ox) % nx for ox, oy in stencil.offsets]
    else:
        cols = [(dof + off) % n for off in stencil.offsets]
    return states[cols, :].T


def _block_features(snap: SnapshotSet, dof: int, block: FeatureBlock,
                    grid_shape: tuple | None) -> np.ndarray:
    window = gather_window(snap.states, dof, block.stencil, grid_shape)
    if block.kind == "quadratic":
        return window * snap.states[dof, :][:, None]
    return window


def build_problem(snap: SnapshotSet, dof: int, layout: FeatureLayout) -> RegressionProblem:
    """Assemble the un-normalized problem for one DOF from a snapshot set."""
    if not 0 <= dof < snap.n:
        raise IndexError(f"DOF {dof} out of range for n={snap.n}")
    X = np.hstack([_block_features(snap, dof, b, layout.grid_shape) for b in layout.blocks])
    y = -layout.target_sign * snap.rhs[dof, :]
    wnorm = float(np.linalg.norm(gather_window(snap.states, dof, layout.union, layout.grid_shape)))
    return RegressionProblem(dof=dof, X=X, y=y, layout=layout, window_norm=wnorm)


def build_linear_problem(snap: SnapshotSet, dof: int, stencil, coeff_split) -> RegressionProblem:
    """Problem with one or two linear gather blocks.

    ``stencil`` is a StencilSpec or a pair of them; ``coeff_split`` is the
    matching FeatureLayout carrying the physical-constant factoring.
    """
    blocks = coeff_split.blocks
    stencils = (stencil,) if isinstance(stencil, StencilSpec) else tuple(stencil)
    if tuple(b.stencil for b in blocks) != stencils:
        raise DimensionError("stencils do not match the supplied layout")
    return build_problem(snap, dof, coeff_split)


def build_burgers_problem(snap: SnapshotSet, dof: int, s_n: StencilSpec,
                          s_l: StencilSpec, nu: float) -> RegressionProblem:
    """Quadratic transport block plus linear diffusion block.

    Quadratic columns are z_k(t) = u_dof(t) * u_{dof+k}(t); the linear block's
    stored coefficients represent -nu * (physical diffusion stencil).
    """
    from .cases import burgers_layout

    layout = burgers_layout(s_n, s_l, nu, snap.meta.grid)
    return build_problem(snap, dof, layout)


def normalize_problem(p: RegressionProblem) -> RegressionProblem:
    """Divide the problem through by the local solution-window norm.

    The divisor is max(floor, window norm); a degenerate all-zero window
    falls back to the floor instead of dividing by zero. Normalization
    rescales rows of the objective uniformly, so it never moves the argmin of
    the unregularized least-squares problem; it equalizes problems posed at
    different locations so one ridge weight and one solver tolerance apply
    everywhere.
    """
    norm = max(p.window_norm, NORM_FLOOR)
    return replace(
        p,
        X=p.X / norm,
        y=p.y / norm,
        norm=p.norm * norm,
        window_norm=p.window_norm / norm,
    )


def build_normalized_problem(snap: SnapshotSet, dof: int, layout: FeatureLayout) -> RegressionProblem:
    """Gather, then normalize by the local window norm."""
    return normalize_problem(build_problem(snap, dof, layout))
