"""Seeded Monte Carlo for the careless collector.

Generator: numpy ``PCG64``.  Replication ``r`` of a batch with master seed
``s`` runs on ``PCG64(substream_seed(s, r))``, where the substream seed is the
first 64-bit word of ``SeedSequence(s, spawn_key=(r,))``.  Any single
replication can be replayed from the seed recorded in its outcome, and batch
results do not depend on the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._backend import kernels
from .chain import Params
from .errors import DomainError
from .marginal import marginal_mixing_time, q_star

DEFAULT_MAX_STEPS = 10**6
PRNG_NAME = "numpy-PCG64/SeedSequence-spawn-key"


def substream_seed(seed: int, replication: int) -> int:
    """64-bit seed of replication ``replication`` under master ``seed``."""
    if seed < 0 or replication < 0:
        raise DomainError("seed and replication must be non-negative")
    ss = np.random.SeedSequence(seed, spawn_key=(replication,))
    return int(ss.generate_state(1, np.uint64)[0])


def bit_generator(seed: int) -> np.random.PCG64:
    return np.random.PCG64(seed)


def _map(fn: Callable[[int], object], runs: int, workers: int) -> list:
    if workers <= 1 or runs <= 1:
        return [fn(r) for r in range(runs)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(runs)))


@dataclass(frozen=True)
class SimOutcome:
    hitting_time: Optional[int]  # None when censored
    steps_used: int
    seed: int
    replication: int = 0

    @property
    def censored(self) -> bool:
        return self.hitting_time is None


@dataclass
class TrajectoryRecord:
    sizes: np.ndarray  # sizes[t] = |S_t|, t = 0..horizon
    params: Params
    seed: int


@dataclass
class CoupledOutcome:
    t1: SimOutcome
    t2: SimOutcome
    inclusion_held: bool


@dataclass
class HittingStats:
    mean: float  # nan when every run is censored
    variance: float
    stderr: float
    censored: int
    outcomes: list = field(repr=False)

    @property
    def runs(self) -> int:
        return len(self.outcomes)

    @property
    def mean_defined(self) -> bool:
        return self.censored < self.runs


@dataclass
class TrajectoryStats:
    mean_fraction: np.ndarray
    stderr: np.ndarray
    runs: int


@dataclass
class WindowCheck:
    """Per-run outcome of a metastability window check."""

    start: int  # first observed round, the marginal mixing time
    window: int
    violated: np.ndarray  # bool per run
    variant: str

    @property
    def violation_frequency(self) -> float:
        return float(np.mean(self.violated))


def _outcome(t: int, max_steps: int, seed: int, replication: int) -> SimOutcome:
    if t < 0:
        return SimOutcome(None, max_steps, seed, replication)
    return SimOutcome(int(t), int(t), seed, replication)


def simulate_hitting_time(params: Params, seed: int, max_steps: int = DEFAULT_MAX_STEPS,
                          replication: int = 0) -> SimOutcome:
    """First round with all ``n`` coupons held, sampled on the count chain.

    Runs longer than ``max_steps`` rounds come back censored.
    """
    if max_steps < 1:
        raise DomainError("max_steps must be >= 1")
    t = kernels.reduced_hitting_time(bit_generator(seed), params.n, params.p, max_steps)
    return _outcome(t, max_steps, seed, replication)


def batch_hitting_stats(params: Params, runs: int, seed: int,
                        max_steps: int = DEFAULT_MAX_STEPS, workers: int = 1) -> HittingStats:
    if runs < 1:
        raise DomainError("runs must be >= 1")

    def one(r):
        return simulate_hitting_time(params, substream_seed(seed, r), max_steps, r)

    outcomes = _map(one, runs, workers)
    times = np.array([o.hitting_time for o in outcomes if not o.censored], dtype=float)
    censored = runs - times.size
    if times.size == 0:
        mean = var = se = math.nan
    else:
        mean = float(times.mean())
        var = float(times.var(ddof=1)) if times.size > 1 else 0.0
        se = math.sqrt(var / times.size)
    return HittingStats(mean, var, se, censored, outcomes)


def simulate_trajectory(params: Params, seed: int, horizon: int,
                        full: bool = False) -> TrajectoryRecord:
    """``|S_t|`` for ``t = 0..horizon``; ``full=True`` runs the set-valued chain."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    kern = kernels.full_trajectory if full else kernels.reduced_trajectory
    sizes = kern(bit_generator(seed), params.n, params.p, horizon)
    return TrajectoryRecord(np.asarray(sizes), params, seed)


def trajectory_stats(params: Params, runs: int, seed: int, horizon: int,
                     full: bool = False, workers: int = 1) -> TrajectoryStats:
    """Mean and standard error of ``|S_t|/n`` across replications."""
    if runs < 1:
        raise DomainError("runs must be >= 1")
    rows = _map(lambda r: simulate_trajectory(params, substream_seed(seed, r), horizon, full).sizes,
                runs, workers)
    frac = np.vstack(rows) / params.n
    mean = frac.mean(axis=0)
    se = frac.std(axis=0, ddof=1) / math.sqrt(runs) if runs > 1 else np.zeros_like(mean)
    return TrajectoryStats(mean, se, runs)


def simulate_coupled(params1: Params, params2: Params, seed: int,
                     max_steps: int = DEFAULT_MAX_STEPS) -> CoupledOutcome:
    """Run two full chains with ``p1 <= p2`` on shared coupon and loss uniforms.

    ``inclusion_held`` records whether the ``p1`` collection contained the
    ``p2`` collection after every round.
    """
    if params1.n != params2.n:
        raise DomainError("coupled chains need the same n")
    if params1.p > params2.p:
        raise DomainError("coupled chains need p1 <= p2")
    t1, t2, held = kernels.coupled_run(bit_generator(seed), params1.n, params1.p,
                                       params2.p, max_steps)
    return CoupledOutcome(_outcome(t1, max_steps, seed, 0),
                          _outcome(t2, max_steps, seed, 0), bool(held))


def sample_full_states(params: Params, t: int, runs: int, seed: int,
                       workers: int = 1) -> np.ndarray:
    """Membership matrix ``X[r, i-1] = 1{i in S_t}`` over independent runs."""
    if t < 0:
        raise DomainError("t must be >= 0")
    rows = _map(lambda r: kernels.full_state(bit_generator(substream_seed(seed, r)),
                                             params.n, params.p, t), runs, workers)
    return np.vstack(rows)


def estimate_marginal(params: Params, t: int, runs: int, seed: int,
                      workers: int = 1) -> tuple[float, float]:
    """Empirical ``Pr(1 in S_t)`` and its binomial standard error."""
    if runs < 100:
        raise DomainError("estimate_marginal needs runs >= 100")
    x = sample_full_states(params, t, runs, seed, workers)[:, 0]
    est = float(x.mean())
    return est, math.sqrt(est * (1.0 - est) / runs)


def check_metastable_window(params: Params, delta: float, window: int, runs: int,
                            seed: int, variant: str = "small_p",
                            epsilon: Optional[float] = None,
                            workers: int = 1) -> WindowCheck:
    """Simulate rounds ``T .. T+window-1`` after ``T = T_mix(epsilon)`` and flag
    each run that leaves the band.

    ``small_p``: violation when ``| |S_t| - n q* | > 2 delta n q*``;
    ``large_p``: violation when ``|S_t| > delta n``.  ``epsilon`` defaults to
    ``delta q* / 2``.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    if window < 1:
        raise DomainError("window must be >= 1")
    if variant not in ("small_p", "large_p"):
        raise DomainError(f"unknown variant {variant!r}")
    qs = q_star(params)
    n = params.n
    if epsilon is None:
        epsilon = delta * qs / 2.0
    start = marginal_mixing_time(params, epsilon) if epsilon > 0 else 0
    horizon = start + window - 1

    def one(r):
        sizes = kernels.reduced_trajectory(bit_generator(substream_seed(seed, r)), n,
                                           params.p, max(horizon, 1))
        seg = np.asarray(sizes[start: start + window], dtype=float)
        if variant == "small_p":
            return bool(np.any(np.abs(seg - n * qs) > 2.0 * delta * n * qs))
        return bool(np.any(seg > delta * n))

    violated = np.array(_map(one, runs, workers), dtype=bool)
    return WindowCheck(start, window, violated, variant)
