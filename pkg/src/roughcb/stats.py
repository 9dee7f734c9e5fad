"""Estimators and analytic-versus-empirical comparison reports."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .errors import DomainError, EstimationError

Z_THRESHOLD = 3.0


def _as_samples(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=float).ravel()
    if arr.size == 0:
        raise DomainError("samples must be nonempty")
    return arr


def empirical_survival(samples, x: float) -> tuple[float, float]:
    """Fraction of samples strictly above ``x`` and its binomial standard error."""
    arr = _as_samples(samples)
    p = float(np.count_nonzero(arr > x)) / arr.size
    return p, math.sqrt(p * (1.0 - p) / arr.size)


def empirical_mean(samples) -> tuple[float, float]:
    """Sample mean and ``std / sqrt(N)`` with the population (ddof=0) deviation."""
    arr = _as_samples(samples)
    se = float(np.std(arr)) / math.sqrt(arr.size)
    return float(np.mean(arr)), se


def empirical_laplace(samples, lam: float) -> tuple[float, float]:
    """Mean of ``exp(-lam x)`` with its standard error."""
    if not lam >= 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    return empirical_mean(np.exp(-lam * _as_samples(samples)))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    n_points: int
    n_censored: int


BOOTSTRAP_REPLICATES = 200


def _window(n, q_lo, q_hi):
    # Survival just below the i-th order statistic (0-based) is (n - i) / n.
    lo = int(math.ceil(q_lo * n))
    hi = int(math.floor(q_hi * n))
    return np.arange(lo, min(hi, n - 1) + 1)


def _fit_sorted(xs, idx):
    lx = np.log(xs[idx])
    ly = np.log((xs.size - idx) / xs.size)
    return sps.linregress(lx, ly).slope


def loglog_slope(
    samples,
    q_lo: float = 0.90,
    q_hi: float = 0.999,
    censored=None,
    min_points: int = 100,
    replicates: int = BOOTSTRAP_REPLICATES,
    seed: int = 0,
) -> SlopeFit:
    """Least-squares slope of ``log P(X > x)`` against ``log x`` on a quantile window.

    The empirical survival is evaluated at the order statistics whose ranks
    fall in ``[q_lo, q_hi]``.  Samples flagged in ``censored`` are dropped
    first, with a :class:`RuntimeWarning` giving their number.

    Neighbouring order statistics are strongly correlated, so the regression
    standard error understates the sampling spread by an order of magnitude.
    ``stderr`` is instead the standard deviation of the slope over
    ``replicates`` bootstrap resamples of the sorted data, drawn from a
    generator seeded with ``seed`` (so the result is deterministic and
    invariant under permutation of ``samples``).
    """
    if not 0.0 < q_lo < q_hi < 1.0:
        raise DomainError("need 0 < q_lo < q_hi < 1")
    arr = _as_samples(samples)
    n_cens = 0
    if censored is not None:
        mask = np.asarray(censored, dtype=bool).ravel()
        if mask.shape != arr.shape:
            raise DomainError("censored mask must match samples")
        n_cens = int(mask.sum())
        if n_cens:
            warnings.warn(
                f"{n_cens} censored samples excluded from the tail fit",
                RuntimeWarning,
                stacklevel=2,
            )
        arr = arr[~mask]
    if int(replicates) != replicates or replicates < 2:
        raise DomainError("replicates must be an integer >= 2")
    xs = np.sort(arr)
    n = xs.size
    if n == 0:
        raise EstimationError("no uncensored samples")
    idx = _window(n, q_lo, q_hi)
    if idx.size < min_points:
        raise EstimationError(f"only {idx.size} tail points in the window; need {min_points}")
    x = xs[idx]
    if not np.all(x > 0):
        raise EstimationError("tail samples must be positive")
    if np.ptp(np.log(x)) == 0.0:
        raise EstimationError("degenerate window: all tail samples equal")
    slope = _fit_sorted(xs, idx)
    rng = np.random.default_rng(seed)
    boot = np.empty(int(replicates))
    with np.errstate(divide="ignore", invalid="ignore"):
        for r in range(boot.size):
            resample = np.sort(xs[rng.integers(0, n, n)])
            boot[r] = _fit_sorted(resample, idx) if np.ptp(resample[idx]) > 0 else np.nan
    stderr = float(np.nanstd(boot, ddof=1))
    return SlopeFit(float(slope), stderr, int(idx.size), n_cens)


def geometric_chisquare(counts, p: float, min_expected: float = 5.0) -> tuple[float, float, int]:
    """Pearson test of integer data against Geometric(p) on {0, 1, ...}.

    Cells are ``{0}, {1}, ...`` up to the last with expected count at least
    ``min_expected``, plus a pooled upper tail.  Returns
    ``(statistic, p_value, degrees_of_freedom)``.
    """
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p}")
    data = np.asarray(counts).ravel()
    if data.size == 0:
        raise DomainError("counts must be nonempty")
    if np.any(data < 0) or np.any(data != np.floor(data)):
        raise DomainError("counts must be nonnegative integers")
    n = data.size
    q = 1.0 - p
    k_last = 0
    while n * p * q ** (k_last + 1) >= min_expected and k_last < 10_000:
        k_last += 1
    if k_last == 0:
        raise EstimationError("too few observations for a chi-square test")
    expected = n * p * q ** np.arange(k_last + 1)
    expected = np.append(expected, n * q ** (k_last + 1))
    observed = np.bincount(np.minimum(data.astype(np.int64), k_last + 1), minlength=k_last + 2)
    res = sps.chisquare(observed, expected)
    return float(res.statistic), float(res.pvalue), len(observed) - 1


@dataclass(frozen=True)
class ReportRow:
    name: str
    analytic: float
    empirical: float
    std_error: float
    z: float
    passed: bool
    abs_tol: float = 0.0

    @property
    def diff(self) -> float:
        return self.empirical - self.analytic


def make_row(name: str, analytic: float, empirical: float, std_error: float, abs_tol: float = 0.0) -> ReportRow:
    """Row with ``z = (empirical - analytic) / se``; passes if ``|z| <= 3`` or within ``abs_tol``."""
    diff = empirical - analytic
    if std_error > 0:
        z = diff / std_error
    else:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    passed = abs(z) <= Z_THRESHOLD or abs(diff) <= abs_tol
    return ReportRow(name, float(analytic), float(empirical), float(std_error), float(z), bool(passed), float(abs_tol))


@dataclass(frozen=True)
class Functional:
    """Which estimator a report row applies to its samples."""

    kind: str
    arg: float = 0.0
    abs_tol: float = 0.0

    _ESTIMATORS = ("mean", "laplace", "survival")

    def __post_init__(self):
        if self.kind not in self._ESTIMATORS:
            raise DomainError(f"unknown functional {self.kind!r}")

    def estimate(self, samples) -> tuple[float, float]:
        if self.kind == "mean":
            return empirical_mean(samples)
        if self.kind == "laplace":
            return empirical_laplace(samples, self.arg)
        return empirical_survival(samples, self.arg)


@dataclass
class ComparisonReport:
    rows: list[ReportRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def add(self, row: ReportRow) -> None:
        self.rows.append(row)

    def failures(self) -> list[ReportRow]:
        return [r for r in self.rows if not r.passed]


def build_report(
    pairs: Sequence[tuple[str, float, Sequence[float], Functional]],
    metadata: dict | None = None,
) -> ComparisonReport:
    """Apply each row's functional to its samples and compare with the analytic value."""
    report = ComparisonReport(metadata=dict(metadata or {}))
    for name, analytic, samples, fn in pairs:
        est, se = fn.estimate(samples)
        report.add(make_row(name, analytic, est, se, fn.abs_tol))
    return report


def relative_tolerance(value: float, rel: float) -> float:
    """Absolute tolerance equal to ``rel`` times ``|value|``."""
    return abs(value) * rel


__all__: list[str] = [
    "ComparisonReport",
    "Functional",
    "ReportRow",
    "SlopeFit",
    "build_report",
    "empirical_laplace",
    "empirical_mean",
    "empirical_survival",
    "geometric_chisquare",
    "loglog_slope",
    "make_row",
    "relative_tolerance",
]
