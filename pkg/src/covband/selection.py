"""Bandwidth selection by resampling, plus oracle and rate diagnostics.

The data-driven bandwidth is picked by splitting the sample N times at
random into groups of size n1 and n2, fitting the regularized estimator on
group 1, measuring its distance to the plain sample covariance of group 2,
averaging over splits, and minimizing over the bandwidth grid
(:func:`estimate_risk` / :func:`select_k`).

Two oracle quantities calibrate that choice: :func:`oracle_k1` minimizes
the realized loss of one sample against the true covariance, and
:func:`oracle_k0` minimizes the Monte Carlo expected loss over fresh
datasets from a known model.  :func:`theoretical_bandwidth` evaluates the
asymptotic bandwidth rate as a diagnostic; nothing consumes it
automatically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BandwidthTooLarge, DataFormatError, InsufficientData
from .estimators import (
    _banded_regressions,
    _covariance_from_factors,
    as_data_matrix,
    sample_covariance,
)
from .matcore import band, matrix_norm
from .simgen import CovarianceModel, build_covariance, sample_gaussian, substream

ESTIMATOR_KINDS = ("banded", "cholesky")
SELECTION_NORMS = ("one_one", "operator")


@dataclass(frozen=True)
class RiskCurve:
    """Estimated risk per bandwidth, with the resampling metadata.

    For resampling curves ``N``, ``n1``, ``n2`` and ``seed`` record the
    split scheme; oracle loss curves carry ``None`` there, since no split
    is involved.
    """

    k_grid: np.ndarray
    risk: np.ndarray
    estimator_kind: str
    N: int | None
    n1: int | None
    n2: int | None
    norm: str
    seed: int | None

    def __post_init__(self):
        k = np.asarray(self.k_grid, dtype=int)
        r = np.asarray(self.risk, dtype=float)
        if k.ndim != 1 or r.shape != k.shape or k.size == 0:
            raise ValueError("k_grid and risk must be 1-D arrays of equal positive length")
        if np.any(np.diff(k) <= 0) or k[0] < 0:
            raise ValueError("k_grid must be strictly ascending nonnegative integers")
        if not np.all(np.isfinite(r)) or np.any(r < 0):
            raise ValueError("risk values must be finite and >= 0")
        if self.estimator_kind not in ESTIMATOR_KINDS:
            raise ValueError(f"estimator_kind must be one of {ESTIMATOR_KINDS}")
        if self.norm not in SELECTION_NORMS:
            raise ValueError(f"norm must be one of {SELECTION_NORMS}")
        if self.N is not None:
            if self.N < 1:
                raise ValueError("N must be >= 1")
            if self.n1 is None or self.n2 is None or self.n1 < 2 or self.n2 < 2:
                raise ValueError("split sizes n1, n2 must both be >= 2")
        k.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "k_grid", k)
        object.__setattr__(self, "risk", r)


@dataclass(frozen=True)
class SelectionResult:
    """A selected bandwidth together with the curve it minimizes."""

    k_hat: int
    curve: RiskCurve

    def __post_init__(self):
        ks = self.curve.k_grid
        if self.k_hat not in ks:
            raise ValueError("k_hat must lie on the curve's grid")
        if self.curve.risk[np.searchsorted(ks, self.k_hat)] != self.curve.risk.min():
            raise ValueError("k_hat must attain the minimum risk")


def default_k_grid(p: int, estimator_kind: str, n_fit: int) -> np.ndarray:
    """0..p-1 for the banded estimator; capped at n_fit - 2 for cholesky."""
    hi = p - 1 if estimator_kind == "banded" else min(p - 1, n_fit - 2)
    return np.arange(0, max(hi, 0) + 1)


def log_split_size(n: int) -> int:
    """The alternative first-split size floor(n (1 - 1/log n)) for large n."""
    if n < 3:
        raise ValueError("n must be >= 3")
    return int(np.floor(n * (1.0 - 1.0 / np.log(n))))


def estimate_risk(
    X,
    k_grid=None,
    estimator_kind: str = "banded",
    N: int = 50,
    n1: int | None = None,
    norm: str = "one_one",
    seed: int = 0,
) -> RiskCurve:
    """Resampling estimate of the bandwidth risk.

    For each of N independent splits, the rows of X are partitioned
    uniformly at random into groups of sizes n1 and n - n1; the estimator
    of the given kind is fit at every bandwidth on group 1 and its
    distance to the sample covariance of group 2 is recorded in the chosen
    norm.  Risks are averaged over splits.

    Split nu draws from the RNG substream (seed, nu), so the curve is a
    deterministic function of (X, parameters, seed).  n1 defaults to
    floor(n / 3); for the cholesky kind every bandwidth must satisfy
    k <= n1 - 2 (regressions on group 1 stay nondegenerate).
    """
    X = as_data_matrix(X)
    n, p = X.shape
    if n < 4:
        raise InsufficientData(f"risk estimation needs n >= 4 observations, got {n}")
    if n1 is None:
        n1 = n // 3
    n1 = int(n1)
    n2 = n - n1
    if n1 < 2 or n2 < 2:
        raise InsufficientData(f"both split groups need >= 2 rows, got n1={n1}, n2={n2}")
    if N < 1:
        raise ValueError("N must be >= 1")
    _check_kind_norm(estimator_kind, norm)
    ks = _check_k_grid(k_grid, default_k_grid(p, estimator_kind, n1))
    if estimator_kind == "cholesky" and ks[-1] > n1 - 2:
        raise BandwidthTooLarge(
            f"cholesky bandwidths must satisfy k <= n1 - 2 = {n1 - 2}, grid goes to {ks[-1]}"
        )

    total = np.zeros(ks.size)
    for nu in range(N):
        perm = substream(seed, nu).permutation(n)
        S1 = sample_covariance(X[perm[:n1]])
        S2 = sample_covariance(X[perm[n1:]])
        total += _split_loss_curve(S1, S2, ks, estimator_kind, norm)
    return RiskCurve(
        k_grid=ks,
        risk=total / N,
        estimator_kind=estimator_kind,
        N=int(N),
        n1=n1,
        n2=n2,
        norm=norm,
        seed=int(seed),
    )


def select_k(curve: RiskCurve) -> SelectionResult:
    """Smallest bandwidth attaining the minimum of the curve."""
    idx = int(np.argmin(curve.risk))  # argmin returns the first minimum; grid ascends
    return SelectionResult(k_hat=int(curve.k_grid[idx]), curve=curve)


def oracle_k1(X, truth, k_grid=None, estimator_kind: str = "banded",
              norm: str = "one_one") -> SelectionResult:
    """Best bandwidth for this sample, judged against the true covariance.

    Returns the argmin (smallest-k tie-break) of the realized loss curve
    k -> ||estimate_k(X) - truth||.
    """
    X = as_data_matrix(X)
    n, p = X.shape
    truth = np.asarray(truth, dtype=float)
    if truth.shape != (p, p):
        raise ValueError(f"truth must be {p} x {p}, got {truth.shape}")
    _check_kind_norm(estimator_kind, norm)
    ks = _check_k_grid(k_grid, default_k_grid(p, estimator_kind, n))
    if estimator_kind == "cholesky" and ks[-1] > n - 2:
        raise BandwidthTooLarge(
            f"cholesky bandwidths must satisfy k <= n - 2 = {n - 2}, grid goes to {ks[-1]}"
        )
    losses = _split_loss_curve(sample_covariance(X), truth, ks, estimator_kind, norm)
    curve = RiskCurve(
        k_grid=ks, risk=losses, estimator_kind=estimator_kind,
        N=None, n1=None, n2=None, norm=norm, seed=None,
    )
    return select_k(curve)


def oracle_k0(
    model: CovarianceModel,
    n: int,
    p: int,
    k_grid=None,
    reps: int = 100,
    estimator_kind: str = "banded",
    norm: str = "one_one",
    seed: int = 0,
) -> tuple[int, np.ndarray]:
    """Monte Carlo oracle bandwidth for a known model.

    Averages the realized loss curve over ``reps`` independent datasets of
    n rows drawn from the model (dataset r uses substream (seed, r)) and
    returns the argmin bandwidth together with the mean loss per grid
    point.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    _check_kind_norm(estimator_kind, norm)
    Sigma = build_covariance(model, p)
    ks = _check_k_grid(k_grid, default_k_grid(p, estimator_kind, n))
    if estimator_kind == "cholesky" and ks[-1] > n - 2:
        raise BandwidthTooLarge(
            f"cholesky bandwidths must satisfy k <= n - 2 = {n - 2}, grid goes to {ks[-1]}"
        )
    total = np.zeros(ks.size)
    for r in range(reps):
        X = sample_gaussian(Sigma, n, np.random.SeedSequence([int(seed), r]))
        total += _split_loss_curve(sample_covariance(X), Sigma, ks, estimator_kind, norm)
    mean_loss = total / reps
    return int(ks[int(np.argmin(mean_loss))]), mean_loss


def theoretical_bandwidth(n: int, p: int, alpha: float) -> int:
    """The asymptotic bandwidth rate (log p / n)^(-1/(2 (alpha + 1))).

    Evaluated with proportionality constant 1, rounded half away from
    zero, floored at 1.  alpha is the off-diagonal decay exponent of the
    covariance class.  Diagnostic only.
    """
    if n < 2 or p < 2:
        raise ValueError("need n >= 2 and p >= 2")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    value = (np.log(p) / n) ** (-1.0 / (2.0 * (alpha + 1.0)))
    return max(1, int(np.floor(value + 0.5)))


def write_risk_curve(path, curve: RiskCurve, k_hat: int | None = None) -> None:
    """Write a curve as CSV with header ``k,risk``; append ``# k_hat=...``
    as a trailing comment when a selection is supplied."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,risk\n")
        for k, r in zip(curve.k_grid, curve.risk):
            fh.write(f"{int(k)},{float(r)!r}\n")
        if k_hat is not None:
            fh.write(f"# k_hat={int(k_hat)}\n")


def read_risk_curve(path) -> tuple[np.ndarray, np.ndarray, int | None]:
    """Parse a risk-curve CSV back into (k_grid, risk, k_hat or None)."""
    ks, rs, k_hat = [], [], None
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "k,risk":
            raise DataFormatError(f"{path}: expected header 'k,risk', got {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "k_hat=" in line:
                    k_hat = int(line.split("k_hat=")[1])
                continue
            k, r = line.split(",")
            ks.append(int(k))
            rs.append(float(r))
    return np.asarray(ks, dtype=int), np.asarray(rs, dtype=float), k_hat


# ---------------------------------------------------------------------------
# Loss curves over a bandwidth grid.
# ---------------------------------------------------------------------------


def _split_loss_curve(S_fit, target, ks, estimator_kind, norm) -> np.ndarray:
    """||estimate_k - target|| for every k, with the estimator built from
    the sample covariance ``S_fit``."""
    if estimator_kind == "banded":
        if norm == "one_one":
            return _one_one_band_curve(S_fit, target, ks)
        return np.array(
            [matrix_norm(band(S_fit, int(k)) - target, "operator") for k in ks]
        )
    table = _banded_regressions(S_fit, ks)
    out = np.empty(len(ks))
    for i, k in enumerate(ks):
        A, D = table[int(k)]
        diff = _covariance_from_factors(A, D) - target
        if norm == "one_one":
            out[i] = np.max(np.sum(np.abs(diff), axis=0))
        else:
            out[i] = matrix_norm(diff, "operator")
    return out


def _one_one_band_curve(S, T, ks) -> np.ndarray:
    """||B_k(S) - T||_(1,1) for every k in ks, in one vectorized pass.

    The column j sum at bandwidth k splits into the |S - T| entries inside
    the band plus the |T| entries outside it; both are prefix-sum
    differences down column j, so the whole curve costs O(p^2 + |ks| p).
    """
    p = S.shape[0]
    PE = np.cumsum(np.abs(S - T), axis=0)
    PT = np.cumsum(np.abs(T), axis=0)
    col_T = PT[-1]
    j = np.arange(p)
    kcol = np.asarray(ks, dtype=int)[:, None]
    hi = np.minimum(j + kcol, p - 1)
    lo = j - kcol - 1
    inside = lo >= 0
    lo_safe = np.maximum(lo, 0)
    band_E = PE[hi, j] - np.where(inside, PE[lo_safe, j], 0.0)
    band_T = PT[hi, j] - np.where(inside, PT[lo_safe, j], 0.0)
    return np.max(band_E + (col_T - band_T), axis=1)


def _check_kind_norm(kind, norm):
    if kind not in ESTIMATOR_KINDS:
        raise ValueError(f"estimator_kind must be one of {ESTIMATOR_KINDS}, got {kind!r}")
    if norm not in SELECTION_NORMS:
        raise ValueError(f"norm must be one of {SELECTION_NORMS}, got {norm!r}")


def _check_k_grid(k_grid, default: np.ndarray) -> np.ndarray:
    if k_grid is None:
        return default
    ks = np.asarray(k_grid, dtype=int)
    if ks.ndim != 1 or ks.size == 0:
        raise ValueError("k_grid must be a nonempty 1-D integer sequence")
    if ks[0] < 0 or np.any(np.diff(ks) <= 0):
        raise ValueError("k_grid must be strictly ascending nonnegative integers")
    return ks
