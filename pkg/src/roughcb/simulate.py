"""Monte Carlo engine for the level-``n`` particle construction.

An excursion starts at ``x0``, descends at unit speed, jumps up at rate
``gamma_n`` by Pareto II amounts and is killed on reaching 0.  It is stored
as its descent segments ``(low, high]``: segment ``i`` starts at ``high[i]``
(time 0 or a jump time) and ends at ``low[i]`` (the next jump, or 0).

Local times are interval-stabbing counts.  Time 0 is not a visit, so the
first segment is open at its top: an excursion started at level ``y``
revisits ``y`` a Geometric(1/W_n(y)) number of times on {0, 1, ...}.

An aggregate sample superposes ``K = floor(c0 n^alpha zeta)`` excursions
with starting points drawn from the integrated-tail law and rescales:

    S(t) = (c0 n^alpha)^-1 * sum_k L_k(n t / c0),
    tau  = (c0 / n) max_k peak_k,
    T    = n^-(1+alpha) * sum_k duration_k.

Every excursion draws from its own stream keyed by
``(master_seed, sample_index, excursion_index)``, so results do not depend
on scheduling or worker count.

Two kinds of truncation exist, both recorded on the output:

* ``jump_cap`` bounds the number of jumps per aggregate sample (censoring).
* ``level_cap`` replaces every excursion above a level ``H`` by an
  immediate return to ``H``.  Because paths only move down continuously,
  this leaves local times at levels below ``H`` and the events
  ``{tau > t}`` for ``n t / c0 < H`` unchanged in law, while durations,
  peaks and total progeny become lower bounds (``truncated``).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError
from .prelimit import DiscreteModel

RNG_ALGORITHM = "PCG64/SeedSequence(master_seed, spawn_key=(sample, excursion))"

_FIRST_CHUNK = 32
_MAX_CHUNK = 1 << 17


@dataclass(frozen=True)
class Excursion:
    """A path from ``start`` killed at its first passage below 0."""

    start: float
    highs: np.ndarray = field(repr=False)
    lows: np.ndarray = field(repr=False)
    duration: float
    peak: float
    censored: bool
    n_jumps: int
    truncated: bool = False

    @property
    def segments(self) -> list[tuple[float, float]]:
        return list(zip(self.highs.tolist(), self.lows.tolist()))


@dataclass(frozen=True)
class AggregateSample:
    sample_index: int
    extinction_time: float
    total_progeny: float
    mass_profile: tuple[tuple[float, float], ...]
    censored: bool
    excursion_count: int
    n_jumps: int
    truncated: bool = False

    def mass_at(self, t: float) -> float:
        for tt, m in self.mass_profile:
            if tt == t:
                return m
        raise KeyError(t)


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo configuration; ``level_cap`` is in pre-limit units."""

    dm: DiscreteModel
    zeta: float
    t_grid: tuple[float, ...]
    n_samples: int
    master_seed: int
    jump_cap: int = 10**7
    level_cap: float | None = None

    def __post_init__(self):
        grid = tuple(float(t) for t in self.t_grid)
        object.__setattr__(self, "t_grid", grid)
        if any(t < 0 or not math.isfinite(t) for t in grid):
            raise DomainError("t_grid entries must be finite and nonnegative")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("t_grid must be strictly increasing")
        if not self.zeta > 0:
            raise DomainError(f"zeta must be positive, got {self.zeta}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise DomainError("n_samples must be a positive integer")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")
        if int(self.jump_cap) != self.jump_cap or self.jump_cap < 1:
            raise DomainError("jump_cap must be a positive integer")
        if self.level_cap is not None and not self.level_cap > 0:
            raise DomainError("level_cap must be positive")
        if self.dm.excursion_count(self.zeta) == 0:
            raise ParameterError(
                f"c0 n^alpha zeta = {self.dm.excursion_count_scale * self.zeta:.3g} < 1: "
                "no excursions; increase n or zeta"
            )

    @property
    def levels(self) -> np.ndarray:
        """Pre-limit levels ``n t / c0`` of the time grid."""
        return np.array([self.dm.level(t) for t in self.t_grid])


def excursion_stream(master_seed: int, sample_index: int, excursion_index: int):
    """Independent generator for one excursion of one aggregate sample."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(sample_index, excursion_index))
    return np.random.Generator(np.random.PCG64(ss))


def _uniform_open(rng, size):
    # random() lies in [0, 1); 1 - random() lies in (0, 1].
    return 1.0 - rng.random(size)


def _draw_initial(dm, rng):
    return _uniform_open(rng, None) ** (-1.0 / dm.alpha) - 1.0


def _walk(dm, x0, rng, cap, level_cap):
    """Yield ``(highs, lows, jumps_used, done)`` chunk by chunk.

    ``done`` is True when the path has reached 0; the walk stops early
    (``done`` False on the last chunk) once ``cap`` jumps have been used.
    """
    inv_shape = -1.0 / (dm.alpha + 1.0)
    rate_scale = 1.0 / dm.gamma_n
    v = x0
    used = 0
    size = _FIRST_CHUNK
    while True:
        e = rng.standard_exponential(size) * rate_scale
        j = _uniform_open(rng, size) ** inv_shape - 1.0
        steps = j - e
        if level_cap is None:
            highs = np.empty(size)
            highs[0] = v
            np.cumsum(steps[:-1], out=highs[1:])
            highs[1:] += v
        else:
            # Lindley recursion for the distance below the cap.
            s = np.empty(size)
            s[0] = 0.0
            np.cumsum(-steps[:-1], out=s[1:])
            floor = s.copy()
            floor[0] = -(level_cap - v)
            np.minimum.accumulate(floor, out=floor)
            highs = level_cap - (s - floor)
        lows = highs - e
        hit = np.flatnonzero(lows <= 0.0)
        stop = int(hit[0]) if hit.size else size
        budget = cap - used
        if stop > budget:
            # Segments 0..budget-1 end in a jump; segment ``budget`` would
            # need one more jump than allowed.  Keep it open-ended at low.
            k = budget + 1
            yield highs[:k], lows[:k], budget, False
            return
        if hit.size:
            lows[stop] = 0.0
            yield highs[: stop + 1], lows[: stop + 1], stop, True
            return
        used += size
        v = lows[-1] + j[-1]
        if level_cap is not None:
            v = min(v, level_cap)
        yield highs, lows, size, False
        size = min(2 * size, _MAX_CHUNK)


def sample_excursion(
    dm: DiscreteModel,
    x0: float,
    rng: np.random.Generator,
    cap: int = 10**7,
    level_cap: float | None = None,
) -> Excursion:
    """Simulate one excursion from ``x0`` with at most ``cap`` jumps.

    A censored excursion keeps its segments up to the last allowed jump;
    its final segment ends at the position reached before the next jump.
    """
    if not x0 > 0 or not math.isfinite(x0):
        raise DomainError(f"x0 must be positive and finite, got {x0}")
    if int(cap) != cap or cap < 0:
        raise DomainError("cap must be a nonnegative integer")
    if level_cap is not None and x0 > level_cap:
        raise DomainError("x0 lies above level_cap")
    his, los = [], []
    n_jumps = 0
    done = False
    for h, lo, used, done in _walk(dm, x0, rng, cap, level_cap):
        his.append(h)
        los.append(lo)
        n_jumps += used
    highs = np.concatenate(his)
    lows = np.concatenate(los)
    peak = float(highs.max())
    truncated = level_cap is not None and peak >= level_cap and n_jumps > 0
    duration = float(np.sum(highs - lows))
    return Excursion(
        start=float(x0),
        highs=highs,
        lows=lows,
        duration=duration,
        peak=peak,
        censored=not done,
        n_jumps=n_jumps,
        truncated=bool(truncated),
    )


def local_time_at(e: Excursion, level: float) -> int:
    """Number of visits to ``level`` after time 0."""
    if not level > 0:
        raise DomainError(f"level must be positive, got {level}")
    count = int(np.count_nonzero(e.highs >= level) - np.count_nonzero(e.lows >= level))
    if e.highs[0] == level:
        count -= 1
    return count


class _LevelCounter:
    """Streaming interval-stabbing counts on a fixed sorted set of levels."""

    def __init__(self, levels):
        self.levels = np.asarray(levels, dtype=float)
        self.counts = np.zeros(len(self.levels) + 1, dtype=np.int64)

    def add(self, highs, lows, first_open):
        m = len(self.levels)
        # #{high >= y_j} - #{low >= y_j}, as a difference of histograms.
        hi = np.searchsorted(self.levels, highs, side="right")
        lo = np.searchsorted(self.levels, lows, side="right")
        self.counts += np.bincount(hi, minlength=m + 1) - np.bincount(lo, minlength=m + 1)
        if first_open:
            k = int(np.searchsorted(self.levels, highs[0], side="left"))
            if k < m and self.levels[k] == highs[0]:
                # Remove the visit at level k only.
                self.counts[k + 1] -= 1
                self.counts[k] += 1

    def result(self):
        # counts[i] holds segments whose range covers levels[:i]; reverse-cumulate.
        return np.cumsum(self.counts[::-1])[::-1][1:]


def sample_aggregate(cfg: McConfig, sample_index: int) -> AggregateSample:
    """One realisation of the rescaled mass profile, extinction time and progeny."""
    if not 0 <= sample_index < cfg.n_samples:
        raise DomainError(f"sample_index {sample_index} outside [0, {cfg.n_samples})")
    dm = cfg.dm
    k_total = dm.excursion_count(cfg.zeta)
    scale = dm.excursion_count_scale
    levels = cfg.levels
    positive = levels > 0
    counter = _LevelCounter(levels[positive])
    budget = cfg.jump_cap
    peak = 0.0
    duration = 0.0
    n_jumps = 0
    censored = False
    truncated = False
    for k in range(k_total):
        rng = excursion_stream(cfg.master_seed, sample_index, k)
        x0 = _draw_initial(dm, rng)
        lcap = cfg.level_cap
        if lcap is not None and x0 > lcap:
            x0 = lcap
            truncated = True
        first = True
        done = False
        for highs, lows, used, done in _walk(dm, x0, rng, budget, lcap):
            counter.add(highs, lows, first)
            first = False
            peak = max(peak, float(highs.max()))
            duration += float(np.sum(highs - lows))
            budget -= used
            n_jumps += used
        if not done:
            censored = True
        if lcap is not None and peak >= lcap:
            truncated = True
    mass = np.zeros(len(levels))
    mass[positive] = counter.result() / scale
    # Every excursion ends with a visit to 0.
    mass[~positive] = k_total / scale
    profile = tuple((t, float(m)) for t, m in zip(cfg.t_grid, mass))
    return AggregateSample(
        sample_index=sample_index,
        extinction_time=dm.c0 / dm.n * peak,
        total_progeny=duration / dm.n ** (1.0 + dm.alpha),
        mass_profile=profile,
        censored=censored,
        excursion_count=k_total,
        n_jumps=n_jumps,
        truncated=truncated,
    )


def _run_block(args):
    cfg, indices = args
    return [sample_aggregate(cfg, i) for i in indices]


def run_monte_carlo(cfg: McConfig, workers: int = 1) -> list[AggregateSample]:
    """All ``cfg.n_samples`` aggregates, ordered by sample index.

    With ``workers > 1`` samples are spread over processes; the output is
    identical to the serial run.
    """
    if int(workers) != workers or workers < 1:
        raise DomainError("workers must be a positive integer")
    indices = list(range(cfg.n_samples))
    if workers == 1 or cfg.n_samples == 1:
        return _run_block((cfg, indices))
    workers = min(workers, cfg.n_samples)
    blocks = [(cfg, indices[w::workers]) for w in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_block, blocks))
    out = [s for part in parts for s in part]
    out.sort(key=lambda s: s.sample_index)
    return out


def censored_fraction(samples: list[AggregateSample]) -> float:
    if not samples:
        raise DomainError("no samples")
    return sum(s.censored for s in samples) / len(samples)
