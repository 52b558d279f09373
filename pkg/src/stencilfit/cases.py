"""Case registry: modeled forms, feature layouts, canonical configurations.

Each supported case fixes which coefficient blocks are learned and how the
known physical constants factor into them:

================== =========================== ==========================
case               blocks (stored coefficients) modeled semi-discrete form
================== =========================== ==========================
diffusion          L2 stored as +nu*L2          du/dt - nu (L2 . u) = 0
advection          L1 stored as  c*L1           du/dt + c (L1 . u) = 0
advection-diffusion L1 as c*L1, L2 as -nu*L2    du/dt + c (L1 . u) - nu (L2 . u) = 0
burgers            N as N, L as -nu*L           du/dt + (N . z) - nu (L . u) = 0
advection2d        Lx as cx*Lx, Ly as cy*Ly     du/dt + cx (Lx . u) + cy (Ly . u) = 0
================== =========================== ==========================

The diffusion case stores the block with a positive sign (target sign -1),
matching the modeled form written with its explicit minus; every other case
uses target sign +1.
"""

from __future__ import annotations

import numpy as np

from .features import FeatureBlock, FeatureLayout
from .grids import Grid1D, Grid2D
from .operators import StencilSpec, make_axis_stencil, make_centered_stencil
from .simulate import CaseParams


def _stencil(size_or_spec, axis=None):
    if isinstance(size_or_spec, StencilSpec):
        return size_or_spec
    size = int(size_or_spec)
    return make_centered_stencil(size) if axis is None else make_axis_stencil(size, axis)


def diffusion_layout(s_l, nu: float, grid: Grid1D) -> FeatureLayout:
    if not nu > 0:
        raise ValueError("diffusion case needs nu > 0")
    block = FeatureBlock("L2", "linear", _stencil(s_l), scale=nu, nondim=nu / grid.dx**2)
    return FeatureLayout(blocks=(block,), target_sign=-1.0)


def advection_layout(s_l, c: float, grid: Grid1D) -> FeatureLayout:
    if c == 0:
        raise ValueError("advection case needs c != 0")
    block = FeatureBlock("L1", "linear", _stencil(s_l), scale=c, nondim=abs(c) / grid.dx)
    return FeatureLayout(blocks=(block,))


def advection_diffusion_layout(s_l1, s_l2, c: float, nu: float, grid: Grid1D) -> FeatureLayout:
    if c == 0 or not nu > 0:
        raise ValueError("advection-diffusion case needs c != 0 and nu > 0")
    b1 = FeatureBlock("L1", "linear", _stencil(s_l1), scale=c, nondim=abs(c) / grid.dx)
    b2 = FeatureBlock("L2", "linear", _stencil(s_l2), scale=-nu, nondim=nu / grid.dx**2)
    return FeatureLayout(blocks=(b1, b2))


def burgers_layout(s_n, s_l, nu: float, grid: Grid1D) -> FeatureLayout:
    if not nu > 0:
        raise ValueError("burgers case needs nu > 0")
    bn = FeatureBlock("N", "quadratic", _stencil(s_n), scale=1.0, nondim=1.0 / grid.dx)
    bl = FeatureBlock("L", "linear", _stencil(s_l), scale=-nu, nondim=nu / grid.dx**2)
    return FeatureLayout(blocks=(bn, bl))


def advection2d_layout(s_lx, s_ly, cx: float, cy: float, grid: Grid2D) -> FeatureLayout:
    if cx == 0 or cy == 0:
        raise ValueError("advection2d case needs cx, cy != 0")
    bx = FeatureBlock("Lx", "linear", _stencil(s_lx, axis="x"), scale=cx, nondim=abs(cx) / grid.dx)
    by = FeatureBlock("Ly", "linear", _stencil(s_ly, axis="y"), scale=cy, nondim=abs(cy) / grid.dy)
    return FeatureLayout(blocks=(bx, by), grid_shape=grid.shape)


def layout_for_case(params: CaseParams, sizes) -> FeatureLayout:
    """Feature layout for a case, given the stencil size(s) to learn."""
    sizes = (sizes,) if np.isscalar(sizes) else tuple(sizes)
    case = params.case
    if case == "diffusion":
        (s_l,) = sizes
        return diffusion_layout(s_l, params.nu, params.grid)
    if case == "advection":
        (s_l,) = sizes
        return advection_layout(s_l, params.c, params.grid)
    if case == "advection-diffusion":
        s1, s2 = sizes
        return advection_diffusion_layout(s1, s2, params.c, params.nu, params.grid)
    if case == "burgers":
        s_n, s_l = sizes
        return burgers_layout(s_n, s_l, params.nu, params.grid)
    if case == "advection2d":
        sx, sy = sizes
        return advection2d_layout(sx, sy, params.cx, params.cy, params.grid)
    raise ValueError(f"unknown case {case!r}")


def n_stencils(case: str) -> int:
    """How many stencil sizes the case's layout takes."""
    return 1 if case in ("diffusion", "advection") else 2


# Canonical configurations ====================================================
#
# Sampling parameters (n, dt, snapshot counts) follow the published setups;
# domain extents and the 1-D pulse shape are package defaults recorded in the
# bundled config files.

def canonical_params(case: str, seed: int = 1234) -> CaseParams:
    if case == "diffusion":
        return CaseParams(case, Grid1D(201, 10.0), dt=0.04, n_snapshots=500,
                          seed=seed, c=0.0, nu=0.02)
    if case == "advection":
        return CaseParams(case, Grid1D(201, 10.0), dt=0.04, n_snapshots=500,
                          seed=seed, c=1.25, nu=0.0)
    if case == "advection-diffusion":
        return CaseParams(case, Grid1D(201, 10.0), dt=0.04, n_snapshots=1000,
                          seed=seed, c=0.2, nu=0.02)
    if case == "burgers":
        return CaseParams(case, Grid1D(129, 1.0), dt=0.002, n_snapshots=1000,
                          seed=seed, nu=0.01)
    if case == "advection2d":
        return CaseParams(case, Grid2D(101, 101, 10.0, 10.0), dt=0.05,
                          n_snapshots=250, seed=seed, cx=0.5, cy=0.5)
    raise ValueError(f"unknown case {case!r}")
