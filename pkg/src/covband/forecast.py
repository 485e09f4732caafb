"""Partitioned best linear prediction of the back half of a vector.

Given first- and second-moment estimates of a p-vector split at index s,
the best linear predictor of the trailing p - s coordinates from the
leading s is ``mu2 + S21 inv(S11) (x1 - mu1)``; any covariance estimate
(sample, banded, tapered, Cholesky-banded) can supply the blocks.  The
module also ingests count data with the variance-stabilizing
``sqrt(count + 1/4)`` transform and reports per-coordinate mean absolute
forecast errors over a test set.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DataFormatError, NotPositiveDefinite, SingularBlock
from .matcore import cholesky_factor, require_symmetric

TRANSFORMS = ("sqrt_quarter", "none")


@dataclass(frozen=True)
class PartitionedMoments:
    """Mean vector and covariance split into leading/trailing blocks at ``split``."""

    split: int
    mu1: np.ndarray
    mu2: np.ndarray
    S11: np.ndarray
    S12: np.ndarray
    S21: np.ndarray
    S22: np.ndarray


def partition_moments(mu, Sigma, split: int) -> PartitionedMoments:
    """Split moments at a contiguous index: coordinates 1..split vs split+1..p."""
    S = require_symmetric(Sigma, "Sigma")
    mu = np.asarray(mu, dtype=float)
    p = S.shape[0]
    if mu.shape != (p,):
        raise ValueError(f"mu must have length {p}, got shape {mu.shape}")
    s = int(split)
    if not 1 <= s < p:
        raise ValueError(f"split must be in 1..{p - 1}, got {s}")
    S12 = S[:s, s:].copy()
    return PartitionedMoments(
        split=s,
        mu1=mu[:s].copy(),
        mu2=mu[s:].copy(),
        S11=S[:s, :s].copy(),
        S12=S12,
        S21=S12.T.copy(),
        S22=S[s:, s:].copy(),
    )


def predict_second_half(pm: PartitionedMoments, x1) -> np.ndarray:
    """Best linear prediction ``mu2 + S21 inv(S11) (x1 - mu1)``.

    inv(S11) is applied through the Cholesky factor of S11 (two triangular
    solves), never formed explicitly.  A conditioning block that fails the
    positive-definiteness test raises :class:`SingularBlock`.
    """
    x1 = np.asarray(x1, dtype=float)
    if x1.shape != pm.mu1.shape:
        raise ValueError(f"x1 must have length {pm.mu1.size}, got shape {x1.shape}")
    L = _factor_block(pm.S11)
    w = solve_triangular(L, x1 - pm.mu1, lower=True)
    w = solve_triangular(L.T, w, lower=False)
    return pm.mu2 + pm.S21 @ w


def conditional_coefficients(pm: PartitionedMoments) -> np.ndarray:
    """The (p - s, s) coefficient matrix B = S21 inv(S11) of the predictor.

    Computed by Cholesky solves against S12; useful for predicting many
    vectors with one factorization.  Satisfies B @ S11 = S21.
    """
    L = _factor_block(pm.S11)
    Y = solve_triangular(L, pm.S12, lower=True)
    Y = solve_triangular(L.T, Y, lower=False)
    return Y.T


def forecast_error(predictions, actuals) -> np.ndarray:
    """Per-coordinate mean absolute error over test rows.

    ``predictions`` and ``actuals`` are (tests, q) arrays; returns the
    length-q vector of mean |prediction - actual| down each column.
    """
    P = np.asarray(predictions, dtype=float)
    A = np.asarray(actuals, dtype=float)
    if P.ndim != 2 or P.shape != A.shape:
        raise ValueError(f"shape mismatch: predictions {P.shape} vs actuals {A.shape}")
    if P.shape[0] < 1:
        raise ValueError("need at least one test row")
    return np.mean(np.abs(P - A), axis=0)


def ingest_counts(path, transform: str = "sqrt_quarter") -> np.ndarray:
    """Read a counts CSV (rows = days, columns = intervals) into a data matrix.

    A leading header row is auto-detected (first row with any non-numeric
    field is skipped); after that every field must parse as a number and
    all rows must have equal length.  ``sqrt_quarter`` maps each count N
    to sqrt(N + 1/4) and rejects negative values; ``none`` passes values
    through as reals.
    """
    if transform not in TRANSFORMS:
        raise ValueError(f"transform must be one of {TRANSFORMS}, got {transform!r}")
    rows: list[list[float]] = []
    header_skipped = False
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for lineno, fields in enumerate(reader, start=1):
            if not fields or all(f.strip() == "" for f in fields):
                continue
            try:
                values = [float(f) for f in fields]
            except ValueError:
                if not rows and not header_skipped:
                    header_skipped = True  # leading header row
                    continue
                raise DataFormatError(f"{path}:{lineno}: non-numeric field") from None
            if rows and len(values) != len(rows[0]):
                raise DataFormatError(
                    f"{path}:{lineno}: ragged row ({len(values)} fields, expected {len(rows[0])})"
                )
            rows.append(values)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    X = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(X)):
        raise DataFormatError(f"{path}: non-finite entries")
    if transform == "none":
        return X
    if np.any(X < 0):
        i, j = np.argwhere(X < 0)[0]
        raise DataFormatError(
            f"{path}: negative count {X[i, j]} at row {i + 1}, column {j + 1}"
        )
    return np.sqrt(X + 0.25)


def write_forecast_report(path, errors, start_index: int = 1) -> None:
    """Write per-coordinate errors with header ``j,E_j``.

    ``start_index`` sets the coordinate label of the first error (e.g.
    split + 1 when reporting on the predicted half of a vector).
    """
    E = np.asarray(errors, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("j,E_j\n")
        for i, e in enumerate(E):
            fh.write(f"{start_index + i},{float(e)!r}\n")


def _factor_block(S11) -> np.ndarray:
    try:
        return cholesky_factor(S11)
    except NotPositiveDefinite as exc:
        raise SingularBlock(
            "conditioning block S11 is not positive definite; "
            "plug in a regularized covariance estimate (banded, tapered, or "
            "Cholesky-banded) instead of the raw sample covariance"
        ) from exc
