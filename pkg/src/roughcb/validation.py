"""Battery of Monte Carlo checks against the analytic laws.

Three groups of rows are produced:

* excursion level: first-passage transforms from a fixed start and the
  geometric law of the local time at the starting level;
* aggregate level, for each ``n``: Laplace transform of the mass, survival
  of the extinction time, mean mass, plus convergence of the mass transform
  across the ``n`` sequence;
* tails, at the largest ``n`` without level truncation: progeny transform,
  log-log slope of the progeny survival and the censoring budget.

Mass and extinction rows use a level cap above the largest grid level,
which leaves them exact (see :mod:`roughcb.simulate`) at a fraction of
the cost.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import analytics
from .model import ModelParams
from .prelimit import DiscreteModel, discrete_inverse, discrete_scale, make_discrete, z_laplace_from_t
from .simulate import (
    McConfig,
    censored_fraction,
    excursion_stream,
    local_time_at,
    run_monte_carlo,
    sample_excursion,
)
from .stats import (
    ComparisonReport,
    ReportRow,
    empirical_laplace,
    empirical_mean,
    empirical_survival,
    geometric_chisquare,
    loglog_slope,
    make_row,
)
from .errors import EstimationError

# Stream namespaces: aggregate samples use sample indices directly.
_EXCURSION_NAMESPACE = 1 << 40
_LOCAL_TIME_NAMESPACE = 2 << 40
_TAIL_NAMESPACE = 3 << 40

LEVEL_CAP_FACTOR = 1.25


@dataclass
class BatteryConfig:
    params: ModelParams
    zeta: float = 1.0
    n_list: tuple[int, ...] = (1024,)
    samples: int = 5000
    seed: int = 0
    workers: int = 1
    lam: float = 1.0
    t_mass: float = 1.0
    t_survival: tuple[float, ...] = (0.5, 1.0, 2.0)
    excursion_n: int = 256
    excursions: int = 100_000
    excursion_lambdas: tuple[float, ...] = (0.25, 0.5, 1.0)
    local_time_level: float = 10.0
    local_time_lambdas: tuple[float, ...] = (math.log(2.0), 1.0)
    tail_samples: int | None = None
    progeny_lam: float = 1.0
    jump_cap: int = 10**7
    laplace_rel_tol: float = 0.02
    survival_rel_tol: float = 0.10
    slope_tol: float | None = None
    max_censored: float = 0.001
    perturb: float = 0.0
    run_excursions: bool = True
    run_tails: bool = True
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k not in ("params", "extra", "workers")}
        out["params"] = self.params.as_dict()
        out["n_list"] = list(self.n_list)
        for key in ("t_survival", "excursion_lambdas", "local_time_lambdas"):
            out[key] = list(out[key])
        return out


def _perturbed(cfg, value):
    return value * (1.0 + cfg.perturb)


def excursion_rows(cfg: BatteryConfig) -> list[ReportRow]:
    """First-passage and local-time checks for single excursions."""
    dm = make_discrete(cfg.params, cfg.excursion_n)
    rows = []
    durations = np.empty(cfg.excursions)
    for i in range(cfg.excursions):
        rng = excursion_stream(cfg.seed, _EXCURSION_NAMESPACE, i)
        durations[i] = sample_excursion(dm, 1.0, rng, cfg.jump_cap).duration
    for lam in cfg.excursion_lambdas:
        est, se = empirical_laplace(durations, lam)
        exact = _perturbed(cfg, math.exp(-discrete_inverse(dm, lam)))
        rows.append(make_row(f"first_passage_laplace[n={dm.n};x0=1;lambda={lam:g}]", exact, est, se))

    level = cfg.local_time_level
    counts = local_time_counts(dm, level, cfg.excursions, cfg.seed, cfg.jump_cap)
    w_t = scale_at(dm, level)
    for lam in cfg.local_time_lambdas:
        est, se = empirical_laplace(counts, lam)
        exact = _perturbed(cfg, z_laplace_from_t(dm, w_t, lam))
        rows.append(make_row(f"local_time_pgf[n={dm.n};level={level:g};lambda={lam:.6g}]", exact, est, se))
    p = 1.0 / (w_t * (1.0 + cfg.perturb))
    stat, pval, df = geometric_chisquare(counts, min(p, 1.0))
    rows.append(
        ReportRow(
            f"local_time_geometric_chi2[n={dm.n};level={level:g};df={df}]",
            float(df),
            stat,
            math.sqrt(2.0 * df),
            (stat - df) / math.sqrt(2.0 * df),
            pval >= 0.01,
        )
    )
    return rows


def scale_at(dm: DiscreteModel, x: float) -> float:
    """``W_n(x)`` from an extrapolated renewal table."""
    step = min(0.05, max(x, 1.0) / 2000.0)
    return discrete_scale(dm, step, x + step, extrapolate=True)(x)


def local_time_counts(dm: DiscreteModel, level: float, count: int, seed: int, cap: int) -> np.ndarray:
    """Local times at ``level`` of ``count`` excursions started at ``level``."""
    out = np.empty(count, dtype=np.int64)
    for i in range(count):
        rng = excursion_stream(seed, _LOCAL_TIME_NAMESPACE, i)
        # Local time below the cap is unaffected by truncation above it.
        e = sample_excursion(dm, level, rng, cap, level_cap=2.0 * level + 10.0)
        out[i] = local_time_at(e, level)
    return out


@dataclass
class MassResult:
    n: int
    laplace: tuple[float, float]
    analytic_laplace: float
    survival: dict
    mean_mass: tuple[float, float]
    censored: float

    @property
    def laplace_error(self) -> float:
        return abs(self.laplace[0] - self.analytic_laplace)


def mass_samples(cfg: BatteryConfig, n: int):
    """Level-capped aggregates at level ``n`` on the battery's time grid."""
    dm = make_discrete(cfg.params, n)
    grid = tuple(sorted({cfg.t_mass, *cfg.t_survival}))
    cap = LEVEL_CAP_FACTOR * dm.level(max(grid)) + 10.0
    mc = McConfig(dm, cfg.zeta, grid, cfg.samples, cfg.seed, cfg.jump_cap, level_cap=cap)
    return run_monte_carlo(mc, cfg.workers)


def mass_result(cfg: BatteryConfig, n: int) -> MassResult:
    samples = mass_samples(cfg, n)
    p = cfg.params
    mass_t = np.array([s.mass_at(cfg.t_mass) for s in samples])
    ext = np.array([s.extinction_time for s in samples])
    lt = empirical_laplace(mass_t, cfg.lam)
    analytic_lt = _perturbed(cfg, analytics.mass_laplace(p, cfg.zeta, cfg.t_mass, cfg.lam))
    surv = {}
    for t in cfg.t_survival:
        surv[t] = (empirical_survival(ext, t), _perturbed(cfg, analytics.extinction_survival(p, cfg.zeta, t)))
    return MassResult(
        n=n,
        laplace=lt,
        analytic_laplace=analytic_lt,
        survival=surv,
        mean_mass=empirical_mean(mass_t),
        censored=censored_fraction(samples),
    )


def mass_rows(cfg: BatteryConfig, results: list[MassResult]) -> list[ReportRow]:
    rows = []
    p = cfg.params
    for a, b in zip(results, results[1:]):
        noise = 2.0 * math.hypot(a.laplace[1], b.laplace[1])
        rows.append(
            ReportRow(
                f"mass_laplace_error_nonincreasing[n={a.n}->{b.n}]",
                a.laplace_error,
                b.laplace_error,
                noise / 2.0,
                (b.laplace_error - a.laplace_error) / (noise / 2.0) if noise > 0 else 0.0,
                b.laplace_error <= a.laplace_error + noise,
            )
        )
    for r in results:
        mean_exact = _perturbed(cfg, analytics.mean_mass(p, cfg.zeta, cfg.t_mass))
        rows.append(make_row(f"mean_mass[n={r.n};t={cfg.t_mass:g}]", mean_exact, *r.mean_mass))
    last = results[-1]
    rows.append(
        make_row(
            f"mass_laplace[n={last.n};t={cfg.t_mass:g};lambda={cfg.lam:g}]",
            last.analytic_laplace,
            *last.laplace,
            abs_tol=cfg.laplace_rel_tol * last.analytic_laplace,
        )
    )
    for t, ((est, se), exact) in last.survival.items():
        rows.append(
            make_row(
                f"extinction_survival[n={last.n};t={t:g}]",
                exact,
                est,
                se,
                abs_tol=cfg.survival_rel_tol * exact,
            )
        )
    return rows


def default_slope_tol(p: ModelParams) -> float:
    return 0.07 if p.critical else 0.10


def progeny_target_slope(p: ModelParams) -> float:
    tail = analytics.progeny_tail_asymptote(p, 1.0)
    return -tail.exponent


@dataclass
class TailResult:
    n: int
    progeny: np.ndarray
    censored: np.ndarray

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean())


def tail_samples(cfg: BatteryConfig, n: int) -> TailResult:
    """Untruncated aggregates (only the jump budget applies)."""
    dm = make_discrete(cfg.params, n)
    count = cfg.tail_samples or cfg.samples
    mc = McConfig(dm, cfg.zeta, (1.0,), count, cfg.seed ^ _TAIL_NAMESPACE, cfg.jump_cap)
    samples = run_monte_carlo(mc, cfg.workers)
    return TailResult(
        n=n,
        progeny=np.array([s.total_progeny for s in samples]),
        censored=np.array([s.censored for s in samples]),
    )


def tail_rows(cfg: BatteryConfig, tail: TailResult) -> list[ReportRow]:
    p = cfg.params
    rows = []
    exact = _perturbed(cfg, analytics.progeny_laplace(p, cfg.zeta, cfg.progeny_lam))
    est, se = empirical_laplace(tail.progeny, cfg.progeny_lam)
    rows.append(
        make_row(
            f"progeny_laplace[n={tail.n};lambda={cfg.progeny_lam:g}]",
            exact,
            est,
            se,
            abs_tol=cfg.laplace_rel_tol * exact,
        )
    )
    target = _perturbed(cfg, progeny_target_slope(p))
    tol = cfg.slope_tol if cfg.slope_tol is not None else default_slope_tol(p)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        try:
            fit = loglog_slope(tail.progeny, censored=tail.censored)
            slope, slope_se = fit.slope, fit.stderr
        except EstimationError:
            slope, slope_se = math.nan, math.nan
    ok = math.isfinite(slope) and abs(slope - target) <= tol
    rows.append(
        ReportRow(
            f"progeny_tail_slope[n={tail.n};window=0.90-0.999]",
            target,
            slope,
            slope_se,
            (slope - target) / slope_se if slope_se and math.isfinite(slope_se) else math.nan,
            ok,
            tol,
        )
    )
    frac = tail.censored_fraction
    rows.append(
        ReportRow(
            f"censored_fraction[n={tail.n};jump_cap={cfg.jump_cap}]",
            cfg.max_censored,
            frac,
            math.sqrt(frac * (1.0 - frac) / tail.censored.size),
            math.nan,
            frac < cfg.max_censored,
        )
    )
    return rows


def run_battery(cfg: BatteryConfig) -> ComparisonReport:
    report = ComparisonReport(metadata=cfg.as_dict())
    if cfg.run_excursions:
        for row in excursion_rows(cfg):
            report.add(row)
    results = [mass_result(cfg, n) for n in cfg.n_list]
    for row in mass_rows(cfg, results):
        report.add(row)
    if cfg.run_tails:
        for row in tail_rows(cfg, tail_samples(cfg, max(cfg.n_list))):
            report.add(row)
    return report
