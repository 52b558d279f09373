"""Stencil patterns, local operators, and assembled row-local operators.

An :class:`AssembledOperator` holds one sparse row per DOF with periodic
wrap-around. Rows act on localized solution windows; applying the operator
is a gather followed by a weighted sum, equivalent to multiplying by the
dense circulant-like matrix available through :meth:`AssembledOperator.dense`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from .errors import AssemblyError, DimensionError, InvalidStencilError

Offset = Union[int, Tuple[int, int]]


def wrap(i: int, offset: int, n: int) -> int:
    """Periodic column index for DOF ``i`` shifted by ``offset`` on a ring of ``n``."""
    return (i + offset) % n


def wrap2d(i: int, offset: Tuple[int, int], nx: int, ny: int) -> int:
    """Periodic flat index for a row-major 2-D grid, per-axis wrap."""
    ox, oy = offset
    ix = (i % nx + ox) % nx
    iy = (i // nx + oy) % ny
    return iy * nx + ix


# Stencil patterns ============================================================

@dataclass(frozen=True)
class StencilSpec:
    """Ordered offset pattern of a local operator.

    Offsets are signed integers in 1-D or ``(ox, oy)`` pairs in 2-D, strictly
    increasing, and contain the zero offset exactly once at ``center_pos``.
    """

    offsets: tuple
    center_pos: int

    def __post_init__(self):
        offs = tuple(
            tuple(o) if isinstance(o, (tuple, list, np.ndarray)) else int(o)
            for o in self.offsets
        )
        object.__setattr__(self, "offsets", offs)
        if len(offs) == 0:
            raise InvalidStencilError("stencil has no offsets")
        if any(offs[k] >= offs[k + 1] for k in range(len(offs) - 1)):
            raise InvalidStencilError(f"offsets must be strictly increasing: {offs}")
        zero = (0, 0) if self.is_2d else 0
        if offs.count(zero) != 1:
            raise InvalidStencilError(f"stencil must contain the zero offset exactly once: {offs}")
        if not (0 <= self.center_pos < len(offs)) or offs[self.center_pos] != zero:
            raise InvalidStencilError(
                f"center_pos {self.center_pos} does not point at the zero offset in {offs}"
            )

    @property
    def is_2d(self) -> bool:
        return isinstance(self.offsets[0], tuple)

    @property
    def size(self) -> int:
        return len(self.offsets)

    def __len__(self):
        return len(self.offsets)


def make_centered_stencil(size: int) -> StencilSpec:
    """Symmetric 1-D stencil of odd ``size``: offsets -(size-1)/2 ... +(size-1)/2."""
    if size < 3 or size % 2 == 0:
        raise InvalidStencilError(f"centered stencil size must be odd and >= 3, got {size}")
    half = (size - 1) // 2
    return StencilSpec(offsets=tuple(range(-half, half + 1)), center_pos=half)


def make_axis_stencil(size: int, axis: str) -> StencilSpec:
    """Centered 2-D stencil of odd ``size`` along one grid axis ('x' or 'y')."""
    base = make_centered_stencil(size)
    if axis == "x":
        offsets = tuple((k, 0) for k in base.offsets)
    elif axis == "y":
        offsets = tuple((0, k) for k in base.offsets)
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return StencilSpec(offsets=offsets, center_pos=base.center_pos)


def union_stencil(*stencils: StencilSpec) -> StencilSpec:
    """Union of offset patterns, sorted; used when one constraint couples blocks."""
    if not stencils:
        raise InvalidStencilError("union of no stencils")
    offsets = sorted(set().union(*(s.offsets for s in stencils)))
    zero = (0, 0) if stencils[0].is_2d else 0
    return StencilSpec(offsets=tuple(offsets), center_pos=offsets.index(zero))


# Local and assembled operators ===============================================

@dataclass(frozen=True)
class LocalOperator:
    """One operator row: stencil offsets plus a coefficient per offset."""

    dof: int
    stencil: StencilSpec
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        object.__setattr__(self, "coeffs", coeffs)
        if coeffs.shape != (self.stencil.size,):
            raise DimensionError(
                f"row {self.dof}: {coeffs.shape[0] if coeffs.ndim == 1 else coeffs.shape} "
                f"coefficients for a size-{self.stencil.size} stencil"
            )
        if not np.all(np.isfinite(coeffs)):
            raise DimensionError(f"row {self.dof}: non-finite coefficients")


class AssembledOperator:
    """Row-local operator over all DOFs with periodic wrap.

    Construct through :func:`assemble`. The uniform-stencil case (every row
    shares one offset pattern) is stored as index/coefficient matrices so
    :meth:`apply` stays a vectorized gather.
    """

    def __init__(self, n: int, rows: Sequence[LocalOperator], shape: tuple | None = None):
        if len(rows) != n:
            raise AssemblyError(f"expected {n} rows, got {len(rows)}")
        seen = [row.dof for row in rows]
        if sorted(seen) != list(range(n)):
            raise AssemblyError(f"rows must cover DOFs 0..{n - 1} exactly once, got {sorted(seen)}")
        rows = sorted(rows, key=lambda r: r.dof)
        is_2d = rows[0].stencil.is_2d
        if is_2d:
            if shape is None:
                raise AssemblyError("2-D offsets require the grid shape (ny, nx)")
            ny, nx = shape
            if nx * ny != n:
                raise AssemblyError(f"shape {shape} inconsistent with n={n}")
        if any(r.stencil.is_2d != is_2d for r in rows):
            raise AssemblyError("rows mix 1-D and 2-D offsets")

        self.n = n
        self.rows = tuple(rows)
        self.shape = tuple(shape) if shape is not None else None
        self._dense = None

        # Vectorized storage: (n, s) wrapped column indices and coefficients.
        uniform = all(r.stencil.offsets == rows[0].stencil.offsets for r in rows)
        self.uniform_stencil = rows[0].stencil if uniform else None
        if uniform:
            self._cols = _column_index_matrix(rows[0].stencil, n, self.shape)
            self._coeffs = np.vstack([r.coeffs for r in rows])
        else:
            self._cols = None
            self._coeffs = None

    def row(self, i: int) -> LocalOperator:
        return self.rows[i]

    def apply(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise DimensionError(f"state has shape {u.shape}, operator expects ({self.n},)")
        if self._cols is not None:
            return np.einsum("ns,ns->n", self._coeffs, u[self._cols])
        out = np.zeros(self.n)
        for r in self.rows:
            cols = [self._wrap(r.dof, off) for off in r.stencil.offsets]
            out[r.dof] = float(np.dot(r.coeffs, u[cols]))
        return out

    def apply_columns(self, U: np.ndarray) -> np.ndarray:
        """Apply to every column of an (n, n_t) state matrix at once."""
        U = np.asarray(U, dtype=float)
        if U.ndim != 2 or U.shape[0] != self.n:
            raise DimensionError(f"state matrix has shape {U.shape}, operator expects ({self.n}, *)")
        if self._cols is not None:
            return np.einsum("ns,nst->nt", self._coeffs, U[self._cols])
        return np.column_stack([self.apply(U[:, j]) for j in range(U.shape[1])])

    def dense(self) -> np.ndarray:
        """Dense n x n equivalent; materialized once, for analysis paths."""
        if self._dense is None:
            A = np.zeros((self.n, self.n))
            for r in self.rows:
                for off, c in zip(r.stencil.offsets, r.coeffs):
                    A[r.dof, self._wrap(r.dof, off)] += c
            self._dense = A
        return self._dense

    def coefficient_matrix(self) -> np.ndarray:
        """(n, s) coefficients for uniform-stencil operators."""
        if self._coeffs is None:
            raise DimensionError("operator rows do not share a single stencil")
        return self._coeffs

    def _wrap(self, i: int, off) -> int:
        if self.shape is not None and isinstance(off, tuple):
            ny, nx = self.shape
            return wrap2d(i, off, nx, ny)
        return wrap(i, off, self.n)

    def __eq__(self, other):
        if not isinstance(other, AssembledOperator):
            return NotImplemented
        return (
            self.n == other.n
            and self.shape == other.shape
            and all(
                a.stencil.offsets == b.stencil.offsets and np.array_equal(a.coeffs, b.coeffs)
                for a, b in zip(self.rows, other.rows)
            )
        )


def _column_index_matrix(stencil: StencilSpec, n: int, shape) -> np.ndarray:
    """Wrapped column indices, one row of ``s`` columns per DOF."""
    i = np.arange(n)[:, None]
    if stencil.is_2d:
        ny, nx = shape
        ox = np.array([o[0] for o in stencil.offsets])[None, :]
        oy = np.array([o[1] for o in stencil.offsets])[None, :]
        return ((i // nx + oy) % ny) * nx + (i % nx + ox) % nx
    offs = np.array(stencil.offsets)[None, :]
    return (i + offs) % n


def assemble(rows: Sequence[LocalOperator], n: int, shape: tuple | None = None) -> AssembledOperator:
    """Assemble one LocalOperator per DOF into a row-local operator."""
    return AssembledOperator(n, rows, shape=shape)


def assemble_uniform(stencil: StencilSpec, coeffs: np.ndarray, n: int,
                     shape: tuple | None = None) -> AssembledOperator:
    """Assemble from an (n, s) coefficient matrix sharing one stencil."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape == (stencil.size,):
        coeffs = np.tile(coeffs, (n, 1))
    rows = [LocalOperator(i, stencil, coeffs[i]) for i in range(n)]
    return AssembledOperator(n, rows, shape=shape)


def apply(A: AssembledOperator, u: np.ndarray) -> np.ndarray:
    """result_i = sum_k coeffs_k * u[wrap(i + offset_k)]."""
    return A.apply(u)


# Serialization ===============================================================

def write_operator_csv(A: AssembledOperator, path) -> None:
    """One row per (dof, offset): `dof,offset,coeff`, or `dof,offset_x,offset_y,coeff`.

    Rows are ordered by dof ascending then offset ascending.
    """
    is_2d = A.rows[0].stencil.is_2d
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dof", "offset_x", "offset_y", "coeff"] if is_2d else ["dof", "offset", "coeff"])
        for r in A.rows:
            for off, c in zip(r.stencil.offsets, r.coeffs):
                if is_2d:
                    writer.writerow([r.dof, off[0], off[1], f"{c:.17g}"])
                else:
                    writer.writerow([r.dof, off, f"{c:.17g}"])


def read_operator_csv(path, shape: tuple | None = None) -> AssembledOperator:
    """Inverse of :func:`write_operator_csv`."""
    by_dof: dict[int, list] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        is_2d = header[:3] == ["dof", "offset_x", "offset_y"]
        for rec in reader:
            dof = int(rec[0])
            off = (int(rec[1]), int(rec[2])) if is_2d else int(rec[1])
            by_dof.setdefault(dof, []).append((off, float(rec[-1])))
    rows = []
    for dof, entries in by_dof.items():
        entries.sort(key=lambda e: e[0])
        offsets = tuple(e[0] for e in entries)
        zero = (0, 0) if is_2d else 0
        spec = StencilSpec(offsets=offsets, center_pos=offsets.index(zero))
        rows.append(LocalOperator(dof, spec, np.array([e[1] for e in entries])))
    return assemble(rows, n=len(rows), shape=shape)
