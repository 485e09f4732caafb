"""Simulation benchmarks and the forecasting workflow.

:func:`run_simulation_experiment` reproduces the full bandwidth-selection
benchmark for one model configuration: per replication it draws a fresh
dataset, picks the bandwidth by resampling, records the realized losses
of the data-driven, oracle and unregularized estimators against the true
covariance, and aggregates across replications.  The per-bandwidth Monte
Carlo true risk and one single-realization estimated-risk curve are kept
for curve reports.

:func:`forecast_workflow` (and its CSV front end
:func:`run_forecast_experiment`) runs the partitioned-prediction pipeline:
fit a covariance estimator on the leading training rows, predict the back
half of each test row from its front half, and report per-coordinate mean
absolute errors next to the sample-covariance baseline.

Seed discipline: replication r of an experiment with master seed s draws
its dataset from RNG substream (s, r, 0) and passes the derived integer
seed of substream (s, r, 1) to the risk estimator, so reports are
byte-reproducible from (spec, seed) alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError
from .estimators import sample_covariance
from .forecast import conditional_coefficients, forecast_error, ingest_counts, partition_moments
from .matcore import TaperSpec, matrix_norm, schur_product, taper_weights
from .selection import (
    ESTIMATOR_KINDS,
    SELECTION_NORMS,
    RiskCurve,
    _split_loss_curve,
    default_k_grid,
    estimate_risk,
    select_k,
)
from .simgen import (
    CovarianceModel,
    build_covariance,
    parse_model,
    sample_gaussian,
    substream_seed,
)

AGGREGATE_FIELDS = (
    "k_hat",
    "k1",
    "k1_minus_k_hat",
    "loss_k_hat",
    "loss_k0",
    "loss_k1",
    "loss_sample",
)

RECORD_HEADER = "rep,k_hat,k1,loss_k_hat,loss_k0,loss_k1,loss_sample"


@dataclass(frozen=True)
class ExperimentSpec:
    """One simulation configuration: model, sizes, resampling scheme, seed.

    ``n1 = None`` means the default floor(n / 3) split; ``k_grid = None``
    means the default grid for the estimator kind.  Configurations round-trip
    losslessly through :meth:`to_text` / :func:`parse_spec`.
    """

    model: CovarianceModel
    n: int
    p: int
    reps: int
    N: int = 50
    n1: int | None = None
    k_grid: tuple[int, ...] | None = None
    estimator_kind: str = "banded"
    norm: str = "one_one"
    seed: int = 0

    def __post_init__(self):
        if self.n < 4 or self.p < 1:
            raise ValueError("need n >= 4 and p >= 1")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.estimator_kind not in ESTIMATOR_KINDS:
            raise ValueError(f"estimator_kind must be one of {ESTIMATOR_KINDS}")
        if self.norm not in SELECTION_NORMS:
            raise ValueError(f"norm must be one of {SELECTION_NORMS}")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")

    def to_text(self) -> str:
        n1 = "default" if self.n1 is None else str(self.n1)
        kg = "default" if self.k_grid is None else ":".join(str(k) for k in self.k_grid)
        return (
            f"model={self.model.spec_string()} n={self.n} p={self.p} reps={self.reps} "
            f"N={self.N} n1={n1} k_grid={kg} kind={self.estimator_kind} "
            f"norm={self.norm} seed={self.seed}"
        )

    def slug(self) -> str:
        """Filesystem-safe tag, e.g. ``banded_ar1_rho0.9_p100_n100``."""
        param = self.model.spec_string().split("=", 1)[1]
        return f"{self.estimator_kind}_{self.model.kind}_" \
               f"{'H' if self.model.kind == 'fgn' else 'rho'}{param}_p{self.p}_n{self.n}"


def parse_spec(text: str) -> ExperimentSpec:
    """Inverse of :meth:`ExperimentSpec.to_text`."""
    fields: dict[str, str] = {}
    for token in text.split():
        key, value = token.split("=", 1)
        fields[key] = value
    n1 = None if fields["n1"] == "default" else int(fields["n1"])
    kg = (
        None
        if fields["k_grid"] == "default"
        else tuple(int(k) for k in fields["k_grid"].split(":"))
    )
    return ExperimentSpec(
        model=parse_model(fields["model"]),
        n=int(fields["n"]),
        p=int(fields["p"]),
        reps=int(fields["reps"]),
        N=int(fields["N"]),
        n1=n1,
        k_grid=kg,
        estimator_kind=fields["kind"],
        norm=fields["norm"],
        seed=int(fields["seed"]),
    )


@dataclass(frozen=True)
class ReplicationRecord:
    rep: int
    k_hat: int
    k1: int
    loss_k_hat: float
    loss_k0: float
    loss_k1: float
    loss_sample: float

    @property
    def k1_minus_k_hat(self) -> float:
        return float(self.k1 - self.k_hat)


@dataclass(frozen=True)
class ExperimentReport:
    """Everything a table row or risk-curve figure needs for one spec."""

    spec: ExperimentSpec
    k_grid: np.ndarray
    k0: int
    true_risk: np.ndarray  # Monte Carlo mean loss per bandwidth
    est_risk_single: RiskCurve  # estimated risk of replication 0
    records: list[ReplicationRecord] = field(default_factory=list)

    def aggregates(self) -> dict[str, tuple[float, float]]:
        """Mean and SD (ddof=1; 0 when reps=1) per aggregate field."""
        out = {}
        for name in AGGREGATE_FIELDS:
            values = np.array([float(getattr(r, name)) for r in self.records])
            sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
            out[name] = (float(np.mean(values)), sd)
        return out


def run_simulation_experiment(spec: ExperimentSpec) -> ExperimentReport:
    """Run one simulation benchmark configuration.

    Per replication: draw n rows from the model covariance, select k_hat
    by resampling, find the per-sample oracle k1 against the truth, and
    record the losses of the selected, oracle and unregularized
    estimators.  k0 is the argmin of the mean per-bandwidth loss over the
    same replication set, so its per-replication losses are filled in a
    second pass.  Deterministic for a fixed spec.
    """
    Sigma = build_covariance(spec.model, spec.p)
    n1 = spec.n // 3 if spec.n1 is None else spec.n1
    if spec.k_grid is not None:
        ks = np.asarray(spec.k_grid, dtype=int)
    else:
        ks = default_k_grid(spec.p, spec.estimator_kind, n1)

    losses = np.empty((spec.reps, ks.size))
    k_hats = np.empty(spec.reps, dtype=int)
    loss_k_hats = np.empty(spec.reps)
    loss_samples = np.empty(spec.reps)
    est_risk_single = None
    for r in range(spec.reps):
        X = sample_gaussian(Sigma, spec.n, np.random.SeedSequence([spec.seed, r, 0]))
        curve = estimate_risk(
            X,
            k_grid=ks,
            estimator_kind=spec.estimator_kind,
            N=spec.N,
            n1=n1,
            norm=spec.norm,
            seed=substream_seed(spec.seed, r, 1),
        )
        if r == 0:
            est_risk_single = curve
        k_hats[r] = select_k(curve).k_hat
        S = sample_covariance(X)
        losses[r] = _split_loss_curve(S, Sigma, ks, spec.estimator_kind, spec.norm)
        loss_k_hats[r] = losses[r][np.searchsorted(ks, k_hats[r])]
        loss_samples[r] = matrix_norm(S - Sigma, spec.norm)

    true_risk = losses.mean(axis=0)
    i0 = int(np.argmin(true_risk))
    i1 = np.argmin(losses, axis=1)
    records = [
        ReplicationRecord(
            rep=r,
            k_hat=int(k_hats[r]),
            k1=int(ks[i1[r]]),
            loss_k_hat=float(loss_k_hats[r]),
            loss_k0=float(losses[r, i0]),
            loss_k1=float(losses[r, i1[r]]),
            loss_sample=float(loss_samples[r]),
        )
        for r in range(spec.reps)
    ]
    return ExperimentReport(
        spec=spec,
        k_grid=ks,
        k0=int(ks[i0]),
        true_risk=true_risk,
        est_risk_single=est_risk_single,
        records=records,
    )


def write_experiment_report(path, report: ExperimentReport) -> None:
    """Emit the per-replication records plus aggregate lines as CSV.

    Aggregates are recomputed from the records at emission time; comment
    lines carry the configuration text, k0 and the ``name mean sd`` rows
    in full float precision, followed by the record table.
    """
    agg = report.aggregates()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# covband simulation report\n")
        fh.write(f"# spec {report.spec.to_text()}\n")
        fh.write(f"# k0 {report.k0}\n")
        fh.write("# k0 is computed from the same replication set as the records\n")
        for name in AGGREGATE_FIELDS:
            m, s = agg[name]
            fh.write(f"# agg {name} mean={m!r} sd={s!r}\n")
        fh.write(RECORD_HEADER + "\n")
        for rec in report.records:
            fh.write(
                f"{rec.rep},{rec.k_hat},{rec.k1},{float(rec.loss_k_hat)!r},"
                f"{float(rec.loss_k0)!r},{float(rec.loss_k1)!r},{float(rec.loss_sample)!r}\n"
            )


def read_experiment_report(path):
    """Parse an emitted report: (spec_text, k0, aggregates, records).

    ``records`` is a list of :class:`ReplicationRecord`; ``aggregates``
    maps field name to (mean, sd) as read from the comment lines.
    """
    spec_text = None
    k0 = None
    aggregates: dict[str, tuple[float, float]] = {}
    records: list[ReplicationRecord] = []
    saw_header = False
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("spec "):
                    spec_text = body[5:]
                elif body.startswith("agg "):
                    name, mean_part, sd_part = body[4:].split()
                    aggregates[name] = (
                        float(mean_part.split("=", 1)[1]),
                        float(sd_part.split("=", 1)[1]),
                    )
                elif body.startswith("k0 ") and k0 is None:
                    k0 = int(body[3:])
                continue
            if not saw_header:
                if line != RECORD_HEADER:
                    raise DataFormatError(f"{path}: unexpected record header {line!r}")
                saw_header = True
                continue
            f = line.split(",")
            records.append(
                ReplicationRecord(
                    rep=int(f[0]),
                    k_hat=int(f[1]),
                    k1=int(f[2]),
                    loss_k_hat=float(f[3]),
                    loss_k0=float(f[4]),
                    loss_k1=float(f[5]),
                    loss_sample=float(f[6]),
                )
            )
    if spec_text is None or k0 is None or not saw_header:
        raise DataFormatError(f"{path}: not a covband simulation report")
    return spec_text, k0, aggregates, records


def write_ratio_table(path, reports: list[ExperimentReport]) -> None:
    """Bandwidth-to-dimension ratio table across configurations.

    One row per report: oracle k0 / p and mean selected k_hat / p, the
    quantities the dimension-scaling figures plot.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("model,parameter,p,n,k0,k0_over_p,k_hat_mean,k_hat_mean_over_p\n")
        for rep in reports:
            k_hat_mean = rep.aggregates()["k_hat"][0]
            m = rep.spec.model
            fh.write(
                f"{m.kind},{m.parameter!r},{rep.spec.p},{rep.spec.n},"
                f"{rep.k0},{rep.k0 / rep.spec.p!r},"
                f"{k_hat_mean!r},{k_hat_mean / rep.spec.p!r}\n"
            )


# ---------------------------------------------------------------------------
# Forecasting workflow
# ---------------------------------------------------------------------------

FORECAST_ESTIMATORS = ("sample", "banded", "tapered", "cholesky")


@dataclass(frozen=True)
class ForecastOutcome:
    """Per-coordinate forecast errors of a chosen estimator and the baseline."""

    estimator_kind: str
    selected_k: int | None
    split: int
    n_train: int
    n_test: int
    errors: np.ndarray
    baseline_errors: np.ndarray

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.errors))

    @property
    def mean_baseline_error(self) -> float:
        return float(np.mean(self.baseline_errors))


def forecast_workflow(
    X,
    n_train: int,
    split: int,
    estimator_kind: str = "cholesky",
    k="auto",
    taper: TaperSpec | None = None,
    N: int = 50,
    n1: int | None = None,
    norm: str = "one_one",
    seed: int | None = None,
) -> ForecastOutcome:
    """Train on the leading rows, predict the back half of each test row.

    The chosen covariance estimator is fit on rows 0..n_train-1 (means =
    training column means); ``k="auto"`` selects the bandwidth for the
    banded/cholesky kinds by resampling on the training rows, which
    requires ``seed``.  Every test row's trailing p - split coordinates
    are predicted from its leading ones; per-coordinate mean absolute
    errors are returned for the chosen estimator and for the
    sample-covariance baseline.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if not 1 <= n_train < n:
        raise ValueError(f"n_train must be in 1..{n - 1}, got {n_train}")
    if not 1 <= split < p:
        raise ValueError(f"split must be in 1..{p - 1}, got {split}")
    if estimator_kind not in FORECAST_ESTIMATORS:
        raise ValueError(f"estimator must be one of {FORECAST_ESTIMATORS}")
    train = X[:n_train]
    test = X[n_train:]
    mu = train.mean(axis=0)
    S = sample_covariance(train)

    selected_k: int | None = None
    if estimator_kind == "sample":
        S_est = S
    elif estimator_kind == "tapered":
        if taper is None:
            raise ValueError("tapered estimator requires a TaperSpec")
        S_est = schur_product(S, taper_weights(taper, p))
    else:
        if k == "auto":
            if seed is None:
                raise ValueError("k='auto' requires a seed for the resampling splits")
            curve = estimate_risk(
                train, estimator_kind=estimator_kind, N=N, n1=n1, norm=norm, seed=seed
            )
            selected_k = select_k(curve).k_hat
        else:
            selected_k = int(k)
        S_est = _fit_regularized(train, estimator_kind, selected_k)

    errors = _prediction_errors(S_est, mu, split, test)
    baseline = _prediction_errors(S, mu, split, test)
    return ForecastOutcome(
        estimator_kind=estimator_kind,
        selected_k=selected_k,
        split=split,
        n_train=n_train,
        n_test=test.shape[0],
        errors=errors,
        baseline_errors=baseline,
    )


def run_forecast_experiment(
    counts_path,
    n_train: int,
    split: int,
    estimator_kind: str = "cholesky",
    k="auto",
    transform: str = "sqrt_quarter",
    taper: TaperSpec | None = None,
    N: int = 50,
    n1: int | None = None,
    norm: str = "one_one",
    seed: int | None = None,
) -> ForecastOutcome:
    """Ingest a counts CSV (with the chosen transform) and run the workflow."""
    X = ingest_counts(counts_path, transform)
    return forecast_workflow(
        X, n_train, split, estimator_kind, k=k, taper=taper,
        N=N, n1=n1, norm=norm, seed=seed,
    )


def _fit_regularized(train, kind, k):
    from .estimators import banded_covariance, cholesky_banded_covariance

    if kind == "banded":
        return banded_covariance(train, k)
    return cholesky_banded_covariance(train, k)


def _prediction_errors(S_est, mu, split, test):
    pm = partition_moments(mu, S_est, split)
    B = conditional_coefficients(pm)
    preds = pm.mu2[None, :] + (test[:, :split] - pm.mu1[None, :]) @ B.T
    return forecast_error(preds, test[:, split:])
