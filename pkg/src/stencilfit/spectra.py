"""Eigenvalue analysis, Gershgorin discs, and stability classification.

Stability follows the dynamical-systems convention for the semi-discrete form
du/dt + A u = 0: the system is linearly stable when every eigenvalue of -A
has nonpositive real part. Row diagonal dominance of A (center >= sum of
absolute off-center entries, center nonnegative) is the sufficient condition
this package's constrained learner enforces; every disc then lies in the
closed right half-plane and -A cannot have eigenvalues with positive real
part.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, SpectralFailureError
from .operators import AssembledOperator

DENSE_EIG_CAP = 1024


def _as_dense(A) -> np.ndarray:
    if isinstance(A, AssembledOperator):
        return A.dense()
    M = np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    return M


def eigenvalues(A, cap: int = DENSE_EIG_CAP) -> np.ndarray:
    """Dense spectrum of a real square matrix (or assembled operator).

    The LAPACK path (balancing, Hessenberg reduction, shifted QR) keeps
    conjugate pairs exact for real input. ``cap`` guards against accidentally
    requesting the full spectrum of very large assemblies; raise it explicitly
    for the expensive paths.
    """
    M = _as_dense(A)
    if M.shape[0] > cap:
        raise DimensionError(
            f"dense spectrum of n={M.shape[0]} exceeds cap {cap}; "
            "pass a larger cap for the expensive path"
        )
    try:
        return np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise SpectralFailureError(f"eigenvalue iteration failed: {exc}") from exc


def gershgorin_discs(A):
    """(center, radius) per row: center = A_ii, radius = sum_{j != i} |A_ij|."""
    if isinstance(A, AssembledOperator):
        centers = np.empty(A.n)
        radii = np.empty(A.n)
        for r in A.rows:
            centers[r.dof] = r.coeffs[r.stencil.center_pos]
            radii[r.dof] = np.abs(r.coeffs).sum() - abs(r.coeffs[r.stencil.center_pos])
        return list(zip(centers, radii))
    M = _as_dense(A)
    centers = np.diag(M)
    radii = np.abs(M).sum(axis=1) - np.abs(centers)
    return list(zip(centers, radii))


def dominance_margins(A) -> np.ndarray:
    """Per-row center - radius; nonnegative everywhere means diagonal dominance."""
    return np.array([c - r for c, r in gershgorin_discs(A)])


@dataclass(frozen=True)
class SpectralReport:
    """Stability classification of du/dt = -A u.

    ``eigenvalues`` are the eigenvalues of the system matrix -A;
    ``discs`` are the Gershgorin discs of A itself.
    """

    eigenvalues: np.ndarray
    max_real_part_neg_op: float
    discs: list
    stable: bool
    tol: float


def stability_report(A, tol: float = 1e-8, cap: int = DENSE_EIG_CAP) -> SpectralReport:
    """Classify du/dt = -A u: stable iff max Re(lambda(-A)) <= tol."""
    M = _as_dense(A)
    lam = eigenvalues(-M, cap=cap)
    max_re = float(lam.real.max())
    return SpectralReport(
        eigenvalues=lam,
        max_real_part_neg_op=max_re,
        discs=gershgorin_discs(M),
        stable=max_re <= tol,
        tol=tol,
    )


def write_eigenvalues_csv(eigs: np.ndarray, path) -> None:
    """`re,im` rows sorted by real part then imaginary part."""
    order = np.lexsort((np.asarray(eigs).imag, np.asarray(eigs).real))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re", "im"])
        for lam in np.asarray(eigs)[order]:
            writer.writerow([f"{lam.real:.17g}", f"{lam.imag:.17g}"])
