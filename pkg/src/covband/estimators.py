"""Regularized covariance estimators.

Three estimators of a p x p covariance from an (n, p) data matrix:

* ``banded_covariance`` -- zero the sample covariance beyond bandwidth k;
* ``tapered_covariance`` -- Schur-multiply the sample covariance by a
  positive-definite taper weight matrix;
* ``fit_banded_cholesky`` -- regress each coordinate on its k nearest
  predecessors and reassemble covariance/precision from the modified
  Cholesky identity ``inv(Sigma) = (I - A)' D^-1 (I - A)``.

The sample covariance uses divisor n (not n - 1) and always centers by the
column means; the banded Cholesky residual variances use the same divisor
so that the full-bandwidth fit reproduces the sample covariance exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import BandwidthTooLarge, DataFormatError, SingularDesign
from .matcore import PD_PIVOT_RTOL, TaperSpec, band, schur_product, symmetrize, taper_weights


def as_data_matrix(X, name: str = "data") -> np.ndarray:
    """Validate an (n, p) data matrix: 2-D, nonempty, finite."""
    A = np.asarray(X, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D (rows = observations), got ndim={A.ndim}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have n >= 1 and p >= 1, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def sample_covariance(X) -> np.ndarray:
    """Sample covariance with divisor n, columns centered by their means."""
    A = as_data_matrix(X)
    n = A.shape[0]
    Xc = A - A.mean(axis=0)
    return symmetrize(Xc.T @ Xc / n)


def banded_covariance(X, k: int) -> np.ndarray:
    """Sample covariance with all entries beyond bandwidth k zeroed.

    Not guaranteed positive definite; use a smooth taper when positive
    definiteness matters.
    """
    return band(sample_covariance(X), k)


def tapered_covariance(X, t: TaperSpec) -> np.ndarray:
    """Sample covariance Schur-multiplied by the taper weight matrix of ``t``."""
    S = sample_covariance(X)
    return schur_product(S, taper_weights(t, S.shape[0]))


@dataclass(frozen=True)
class BandedCholeskyFactors:
    """Fitted factors of the bandwidth-k modified Cholesky decomposition.

    ``A`` is p x p strictly lower triangular holding the regression
    coefficients of each coordinate on its (up to) k nearest predecessors;
    entries outside that band are zero.  ``D`` is the length-p vector of
    positive residual variances (the diagonal of the D matrix).
    """

    k: int
    A: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        D = np.asarray(self.D, dtype=float)
        p = A.shape[0]
        if A.shape != (p, p):
            raise ValueError("A must be square")
        if D.shape != (p,):
            raise ValueError("D must be a length-p vector of residual variances")
        i, j = np.nonzero(A)
        if np.any(j >= i) or np.any(j < i - self.k):
            raise ValueError(f"A has entries outside the strict lower band of width {self.k}")
        if not np.all(D > 0):
            raise ValueError("all residual variances must be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "D", D)

    @property
    def dim(self) -> int:
        return self.A.shape[0]


def fit_banded_cholesky(X, k: int) -> BandedCholeskyFactors:
    """Least-squares fit of the bandwidth-k Cholesky factors.

    For each coordinate j = 1..p, ordinary least squares of the (centered)
    column j on its min(k, j - 1) nearest predecessor columns; row j of A
    holds the coefficients and D[j] the residual variance with divisor n.
    Coordinate 1 gets the empty regression: zero coefficients and the
    sample variance of column 1.

    Solved through the sample covariance: the coefficients are the
    normal-equation solution on the corresponding covariance block, and
    the residual variance is the Schur complement.  Requires k <= n - 2 so
    the largest regression stays nondegenerate.
    """
    A = as_data_matrix(X)
    n = A.shape[0]
    k = int(k)
    if k < 0:
        raise ValueError("bandwidth k must be >= 0")
    if k > n - 2:
        raise BandwidthTooLarge(f"bandwidth k={k} needs n >= k + 2 observations, got n={n}")
    S = sample_covariance(A)
    coef, resid = _banded_regressions(S, [k])[k]
    return BandedCholeskyFactors(k=k, A=coef, D=resid)


def factors_to_matrices(f: BandedCholeskyFactors) -> tuple[np.ndarray, np.ndarray]:
    """(precision, covariance) implied by fitted factors.

    precision = (I - A)' diag(1/D) (I - A), which is k-banded and positive
    definite; covariance is its inverse, computed via triangular solves on
    the unit lower triangular I - A (never an explicit matrix inverse).
    """
    p = f.dim
    W = np.eye(p) - f.A
    precision = symmetrize(W.T @ (W / f.D[:, None]))
    Winv = solve_triangular(W, np.eye(p), lower=True, unit_diagonal=True)
    covariance = symmetrize((Winv * f.D[None, :]) @ Winv.T)
    return precision, covariance


def cholesky_banded_covariance(X, k: int) -> np.ndarray:
    """Covariance estimate from the bandwidth-k Cholesky fit (convenience)."""
    return factors_to_matrices(fit_banded_cholesky(X, k))[1]


def load_data_csv(path) -> np.ndarray:
    """Read an (n, p) data matrix from CSV (no header, comma separated)."""
    try:
        A = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None
    if not np.all(np.isfinite(A)):
        raise DataFormatError(f"{path}: non-finite entries")
    return A


def save_data_csv(path, X) -> None:
    """Write an (n, p) data matrix as CSV (no header)."""
    np.savetxt(path, as_data_matrix(X), delimiter=",", fmt="%.17g")


# ---------------------------------------------------------------------------
# Internal machinery shared with the selection module.
#
# All bandwidths of a grid reuse the same per-size regression solves: the
# regression of column j for bandwidth k only depends on m = min(k, j - 1),
# so solves are batched by m across columns and assembled per k.
# ---------------------------------------------------------------------------


def _banded_regressions(S, ks) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Fit the banded regressions implied by covariance ``S`` for every k in ks.

    Returns {k: (A_k, D_k)} with A_k the strictly-lower coefficient matrix
    and D_k the vector of residual variances.  Raises SingularDesign when
    any regressor Gram block fails the Cholesky pivot test or a residual
    variance is not positive.
    """
    p = S.shape[0]
    ks = sorted({int(k) for k in ks})
    if ks[0] < 0:
        raise ValueError("bandwidths must be >= 0")
    kmax = min(ks[-1], p - 1)
    ks_set = set(ks)

    # coef[m] -> (columns j0 solved at size m, coefficient block, resid vars)
    solved: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for m in range(1, kmax + 1):
        if m in ks_set:
            cols = np.arange(m, p)
        elif m < p:
            cols = np.array([m])  # column m uses all m predecessors for any k >= m
        else:
            continue
        coefs, resid = _batched_band_solve(S, cols, m)
        solved[m] = (cols, coefs, resid)

    diag = np.diag(S).copy()
    out: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for k in ks:
        A = np.zeros((p, p))
        D = diag.copy()  # m = 0 columns keep their sample variance
        for m in range(1, min(k, p - 1) + 1):
            cols, coefs, resid = solved[m]
            if m < k:
                cols, coefs, resid = cols[:1], coefs[:1], resid[:1]  # only column j0 = m
            rows = cols[:, None]
            regressors = cols[:, None] - m + np.arange(m)[None, :]
            A[rows, regressors] = coefs
            D[cols] = resid
        _require_positive_resid(D)
        out[k] = (A, D)
    return out


def _batched_band_solve(S, cols, m):
    """Normal-equation solves of columns ``cols`` on their m nearest predecessors.

    Gram blocks are contiguous m x m submatrices of S ending just before
    each column; solved by a batched Cholesky with the package-wide pivot
    tolerance.
    """
    start = cols - m
    idx = start[:, None] + np.arange(m)[None, :]  # (B, m) regressor indices
    G = S[idx[:, :, None], idx[:, None, :]]
    c = S[idx, cols[:, None]]
    L = _batched_cholesky(G)
    coefs = _batched_chol_solve(L, c)
    resid = S[cols, cols] - np.einsum("bi,bi->b", c, coefs)
    return coefs, resid


def _batched_cholesky(G):
    """Cholesky factors of a (B, m, m) stack, with the relative pivot test
    of :func:`covband.matcore.cholesky_factor` applied per block."""
    B, m, _ = G.shape
    diag = G[:, np.arange(m), np.arange(m)]
    max_diag = diag.max(axis=1)
    if np.any(max_diag <= 0):
        raise SingularDesign("regressor block has no positive diagonal entry")
    tol = PD_PIVOT_RTOL * max_diag
    L = np.zeros_like(G)
    for j in range(m):
        pivot = G[:, j, j] - np.einsum("bi,bi->b", L[:, j, :j], L[:, j, :j])
        if np.any(pivot < tol):
            bad = int(np.argmax(pivot < tol))
            raise SingularDesign(
                f"regressor Gram block {bad} failed the Cholesky pivot test at column {j}"
            )
        L[:, j, j] = np.sqrt(pivot)
        if j + 1 < m:
            L[:, j + 1 :, j] = (
                G[:, j + 1 :, j] - np.einsum("bki,bi->bk", L[:, j + 1 :, :j], L[:, j, :j])
            ) / L[:, j, j][:, None]
    return L


def _batched_chol_solve(L, c):
    """Solve L L' a = c for each block of a (B, m, m) Cholesky stack."""
    m = L.shape[1]
    y = np.zeros_like(c)
    for i in range(m):
        y[:, i] = (c[:, i] - np.einsum("bi,bi->b", L[:, i, :i], y[:, :i])) / L[:, i, i]
    a = np.zeros_like(c)
    for i in range(m - 1, -1, -1):
        a[:, i] = (y[:, i] - np.einsum("bi,bi->b", L[:, i + 1 :, i], a[:, i + 1 :])) / L[:, i, i]
    return a


def _require_positive_resid(D):
    if not np.all(D > 0):
        bad = int(np.argmin(D))
        raise SingularDesign(
            f"residual variance of coordinate {bad + 1} is not positive "
            "(exactly collinear columns)"
        )


def _covariance_from_factors(A, D) -> np.ndarray:
    """Sigma implied by coefficient matrix A and residual variances D."""
    p = A.shape[0]
    W = np.eye(p) - A
    Winv = solve_triangular(W, np.eye(p), lower=True, unit_diagonal=True)
    return symmetrize((Winv * D[None, :]) @ Winv.T)
