"""Periodic 1-D and 2-D uniform grids.

Grids use the periodic convention dx = length / n (n points, no duplicated
endpoint) so that translation-invariant stencils assemble into exact
circulants. 2-D degrees of freedom are flattened row-major:
``i = iy * nx + ix``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic 1-D grid with ``n`` DOFs on a domain of given length."""

    n: int
    length: float
    periodic: bool = True

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"grid needs n >= 3 DOFs, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"domain length must be positive, got {self.length}")
        if not self.periodic:
            raise ValueError("only periodic grids are supported")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        """Node coordinates, [0, length) with no duplicated endpoint."""
        return np.arange(self.n) * self.dx

    @property
    def shape(self):
        return (self.n,)


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic 2-D grid, flattened row-major (i = iy*nx + ix)."""

    nx: int
    ny: int
    lx: float
    ly: float
    periodic: bool = True

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"grid needs nx, ny >= 3, got {self.nx} x {self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("domain extents must be positive")
        if not self.periodic:
            raise ValueError("only periodic grids are supported")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def n(self) -> int:
        """Total DOF count."""
        return self.nx * self.ny

    @property
    def shape(self):
        """(ny, nx): states flattened row-major reshape to this."""
        return (self.ny, self.nx)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) * self.dy

    def meshgrid(self):
        """(X, Y) coordinate arrays of shape (ny, nx)."""
        return np.meshgrid(self.x, self.y, indexing="xy")
