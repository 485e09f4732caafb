"""Dense symmetric-matrix primitives.

Everything downstream (estimators, bandwidth selection, simulation,
spectral diagnostics, forecasting) is built on the operations in this
module: banding, Schur products, taper weight matrices, matrix norms,
symmetric eigendecomposition and Cholesky factorization.

Matrices are plain ``numpy.ndarray`` objects.  A "symmetric matrix" here
means a square 2-D float array with ``M[i, j] == M[j, i]`` exactly; every
constructor in this package enforces that bit-level symmetry (by averaging
``M`` with its transpose where needed), and consumers check it on entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, NotPositiveDefinite

# Relative pivot tolerance of the positive-definiteness test: a Cholesky
# pivot below PD_PIVOT_RTOL * max(diag) fails the factorization.
PD_PIVOT_RTOL = 1e-12

# Absolute tolerance for the symmetry check when reading matrices from CSV.
CSV_SYMMETRY_ATOL = 1e-9

TAPER_FAMILIES = ("banding-indicator", "triangular", "exponential")

NORMS = ("operator", "one_one", "max_abs", "frobenius")


def require_symmetric(M, name: str = "matrix") -> np.ndarray:
    """Validate that ``M`` is a finite, exactly symmetric square array.

    Returns the validated array as float64 without copying when possible.
    """
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if A.shape[0] < 1:
        raise ValueError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.array_equal(A, A.T):
        raise ValueError(f"{name} is not symmetric")
    return A


def symmetrize(M) -> np.ndarray:
    """Return ``(M + M.T) / 2``, which is exactly symmetric in IEEE arithmetic."""
    A = np.asarray(M, dtype=float)
    return (A + A.T) / 2.0


def band(M, k: int) -> np.ndarray:
    """Zero out all entries farther than ``k`` from the diagonal.

    ``k >= p - 1`` is legal and returns a copy of ``M`` unchanged;
    ``k = 0`` keeps only the diagonal.
    """
    A = require_symmetric(M)
    k = int(k)
    if k < 0:
        raise ValueError("bandwidth k must be >= 0")
    p = A.shape[0]
    if k >= p - 1:
        return A.copy()
    return np.where(_distance_grid(p) <= k, A, 0.0)


def schur_product(A, B) -> np.ndarray:
    """Entry-wise (Schur) product of two symmetric matrices of equal dimension."""
    A = require_symmetric(A, "A")
    B = require_symmetric(B, "B")
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape[0]} vs {B.shape[0]}")
    return A * B


@dataclass(frozen=True)
class TaperSpec:
    """Taper family plus scale.

    ``family`` is one of ``"banding-indicator"``, ``"triangular"``,
    ``"exponential"``.  For the smooth families ``scale`` is the positive
    real decay scale; for the banding indicator it is the integer
    bandwidth ``k >= 0``.
    """

    family: str
    scale: float

    def __post_init__(self):
        if self.family not in TAPER_FAMILIES:
            raise ValueError(
                f"unknown taper family {self.family!r}; expected one of {TAPER_FAMILIES}"
            )
        if self.family == "banding-indicator":
            if self.scale < 0 or self.scale != int(self.scale):
                raise ValueError("banding-indicator scale must be a nonnegative integer")
        elif not self.scale > 0:
            raise ValueError(f"{self.family} taper requires scale > 0")

    def weight_at(self, distance) -> np.ndarray:
        """Taper weight g at the given index distance(s)."""
        d = np.asarray(distance, dtype=float)
        if self.family == "banding-indicator":
            return (d <= self.scale).astype(float)
        if self.family == "triangular":
            return np.maximum(1.0 - d / self.scale, 0.0)
        return np.exp(-d / self.scale)


def taper_weights(t: TaperSpec, p: int) -> np.ndarray:
    """The p x p weight matrix with entry g(|i - j|) for taper ``t``.

    Unit diagonal, entries in [0, 1], nonincreasing in |i - j|.  The
    banding-indicator family yields the 0/1 band mask of its bandwidth.
    """
    p = int(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    return t.weight_at(_distance_grid(p))


def effective_bandwidth(t: TaperSpec, p: int) -> float:
    """Sum of taper weights over the distinct positive distances 1..p-1.

    This scalar plays the role the bandwidth k plays for plain banding:
    for the banding indicator it equals min(k, p - 1) exactly, and for the
    smooth families it measures how much off-diagonal mass the taper keeps.
    """
    p = int(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    if p == 1:
        return 0.0
    return float(np.sum(t.weight_at(np.arange(1, p))))


def matrix_norm(M, which: str = "operator") -> float:
    """Matrix norm of a symmetric matrix.

    ``operator``
        Largest absolute eigenvalue (spectral norm), via ``sym_eigen``.
    ``one_one``
        Maximum absolute column sum (the l1 -> l1 induced norm; for
        symmetric input this coincides with the max row sum).
    ``max_abs``
        Largest absolute entry.
    ``frobenius``
        Square root of the sum of squared entries.
    """
    A = require_symmetric(M)
    if which == "operator":
        return float(np.max(np.abs(sym_eigen(A).eigenvalues)))
    if which == "one_one":
        return float(np.max(np.sum(np.abs(A), axis=0)))
    if which == "max_abs":
        return float(np.max(np.abs(A)))
    if which == "frobenius":
        return float(np.sqrt(np.sum(A * A)))
    raise ValueError(f"unknown norm {which!r}; expected one of {NORMS}")


@dataclass(frozen=True)
class EigenDecomposition:
    """Full spectral decomposition of a symmetric matrix.

    ``eigenvalues`` are sorted descending; column j of ``eigenvectors``
    is the unit eigenvector paired with ``eigenvalues[j]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_eigen(M) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Delegates to LAPACK's dense symmetric solver, which is deterministic
    for a fixed input.
    """
    A = require_symmetric(M)
    w, V = np.linalg.eigh(A)
    order = np.argsort(w)[::-1]
    w = w[order]
    V = V[:, order]
    w.setflags(write=False)
    V.setflags(write=False)
    return EigenDecomposition(eigenvalues=w, eigenvectors=V)


def cholesky_factor(M) -> np.ndarray:
    """Lower-triangular L with ``M = L @ L.T`` and strictly positive diagonal.

    Raises :class:`NotPositiveDefinite` when any pivot drops below
    ``PD_PIVOT_RTOL * max(diag(M))``; Cholesky success is this package's
    positive-definiteness test.
    """
    A = require_symmetric(M)
    p = A.shape[0]
    diag = np.diag(A)
    max_diag = float(np.max(diag))
    if max_diag <= 0.0:
        raise NotPositiveDefinite("matrix has no positive diagonal entry")
    tol = PD_PIVOT_RTOL * max_diag
    L = np.zeros_like(A)
    for j in range(p):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        if pivot < tol:
            raise NotPositiveDefinite(
                f"pivot {pivot:.3e} at column {j} below tolerance {tol:.3e}"
            )
        L[j, j] = math.sqrt(pivot)
        if j + 1 < p:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def is_positive_definite(M) -> bool:
    """True iff ``cholesky_factor`` succeeds on ``M``."""
    try:
        cholesky_factor(M)
    except NotPositiveDefinite:
        return False
    return True


def load_matrix_csv(path) -> np.ndarray:
    """Read a symmetric matrix from CSV (p rows of p fields, no header).

    Symmetry is validated to ``CSV_SYMMETRY_ATOL`` absolute tolerance and
    the result is then symmetrized by averaging, so downstream code sees
    exact symmetry.
    """
    try:
        A = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None
    if A.shape[0] != A.shape[1]:
        raise DataFormatError(
            f"{path}: expected a square matrix, got shape {A.shape}"
        )
    if not np.all(np.isfinite(A)):
        raise DataFormatError(f"{path}: non-finite entries")
    if np.max(np.abs(A - A.T)) > CSV_SYMMETRY_ATOL:
        raise DataFormatError(
            f"{path}: matrix is asymmetric beyond tolerance {CSV_SYMMETRY_ATOL}"
        )
    return symmetrize(A)


def save_matrix_csv(path, M) -> None:
    """Write a symmetric matrix as CSV (p rows of p fields, no header)."""
    A = require_symmetric(M)
    np.savetxt(path, A, delimiter=",", fmt="%.17g")


def _distance_grid(p: int) -> np.ndarray:
    idx = np.arange(p)
    return np.abs(idx[:, None] - idx[None, :])
