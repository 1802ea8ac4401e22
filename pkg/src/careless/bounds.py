"""Analytic estimates of the hitting time and of metastability, in log space.

Most quantities here are ``e^{Theta(n)}`` or worse, so they are carried as
natural logarithms (:class:`LogValue`).  Unconditional bounds are rigorous;
the mean-field interval assumes independence between coupons and over time,
which the chain does not satisfy, and is labelled heuristic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import total_ordering

import numpy as np

from .chain import Params
from .errors import DomainError
from .marginal import CONSTANT_MAX_NP, NEAR_ONE_MAX_NP, marginal_mixing_time, q_star

LN10 = math.log(10.0)


@total_ordering
@dataclass(frozen=True)
class LogValue:
    """A non-negative number stored as its natural log (``-inf`` is zero)."""

    ln_v: float

    @classmethod
    def of(cls, x: float) -> "LogValue":
        if x < 0:
            raise DomainError(f"LogValue holds non-negative numbers, got {x}")
        return cls(math.log(x) if x > 0 else -math.inf)

    @property
    def value(self) -> float:
        """Linear value; ``inf`` when beyond double range."""
        if self.ln_v > 709.782712893384:
            return math.inf
        return math.exp(self.ln_v)

    @property
    def log10(self) -> float:
        return self.ln_v / LN10

    def __add__(self, other: "LogValue") -> "LogValue":
        return LogValue(float(np.logaddexp(self.ln_v, other.ln_v)))

    def __mul__(self, other: "LogValue") -> "LogValue":
        return LogValue(self.ln_v + other.ln_v)

    def __lt__(self, other: "LogValue") -> bool:
        return self.ln_v < other.ln_v


ZERO = LogValue(-math.inf)


@dataclass(frozen=True)
class MeanFieldInterval:
    lower: LogValue
    upper: LogValue
    t_mix: int
    epsilon: float
    lower_clamped: bool  # first lower-bound term was negative and set to 0
    heuristic: bool = True


@dataclass(frozen=True)
class EscapeBound:
    rho: LogValue
    block_len: int
    good_threshold: int
    epsilon: float


@dataclass(frozen=True)
class MetastabilityBound:
    delta: float
    window: int
    prob_bound: LogValue
    variant: str

    @property
    def vacuous(self) -> bool:
        return self.prob_bound.ln_v >= 0.0


class HittingRegime(str, Enum):
    CLASSICAL = "Classical"
    SUPER_CLASSICAL = "Super-classical"
    METASTABLE_I = "Metastable I"
    METASTABLE_II = "Metastable II"
    METASTABLE_III = "Metastable III"
    INFINITE = "Infinite"


@dataclass(frozen=True)
class RegimeEstimate:
    label: HittingRegime
    scale: LogValue
    boundary: bool  # p sits in a +-10x zone around ln n/n^2 or 1/n

    @property
    def log10_scale(self) -> float:
        return self.scale.log10


def _ln(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def _block_len(n: int) -> int:
    return max(1, math.ceil(n * math.log(n)))


def mean_field_interval(params: Params, epsilon: float) -> MeanFieldInterval:
    """Mean-field sandwich on ``E[T]``: with ``T = T_mix(epsilon)``,

        T (1 - q*^n T) + (1 - q*^n)^(T+1) / q*^n  <=  E[T]  <=  T + (q* - epsilon)^-n

    The first lower term is clamped at 0 when ``q*^n T > 1``.
    """
    if params.p >= 1.0:
        raise DomainError("mean-field interval needs p < 1")
    n = params.n
    qs = q_star(params)
    if not 0.0 < epsilon < qs:
        raise DomainError(f"epsilon must lie in (0, q*={qs:.6g}), got {epsilon}")
    t = marginal_mixing_time(params, epsilon)
    ln_t = _ln(t)
    ln_qn = n * math.log(qs)
    upper = LogValue(ln_t) + LogValue(-n * math.log(qs - epsilon))

    ln_tq = ln_qn + ln_t
    clamped = ln_tq >= 0.0
    first = ZERO if clamped else LogValue(ln_t + math.log1p(-math.exp(ln_tq)))
    qn = math.exp(ln_qn)
    if qn >= 1.0:
        second = ZERO
    else:
        second = LogValue((t + 1) * math.log1p(-qn) - ln_qn)
    return MeanFieldInterval(first + second, upper, t, epsilon, clamped)


def _regime_edges(n: int) -> tuple[float, float, float, float]:
    # Super-classical and Metastable II are the +-10x zones around
    # ln n / n^2 and 1/n; when those overlap they are split at the
    # geometric midpoint and Metastable I is empty
    s1 = math.log(n) / n**2
    s2 = 1.0 / n
    e1, e2 = s1 * NEAR_ONE_MAX_NP, s1 * CONSTANT_MAX_NP
    e3, e4 = s2 * NEAR_ONE_MAX_NP, s2 * CONSTANT_MAX_NP
    if e2 > e3:
        mid = math.sqrt(s1 * s2)
        e2 = e3 = mid
    return e1, e2, e3, e4


_ORDER = (HittingRegime.CLASSICAL, HittingRegime.SUPER_CLASSICAL, HittingRegime.METASTABLE_I,
          HittingRegime.METASTABLE_II, HittingRegime.METASTABLE_III)


def _escape_ln(label: HittingRegime, n: int, p: float) -> float:
    if label is HittingRegime.CLASSICAL:
        return -math.inf
    if label is HittingRegime.SUPER_CLASSICAL:
        return math.log(p * n * n)  # n^c with c = p n^2 / ln n
    if label is HittingRegime.METASTABLE_I:
        return math.log(n * n * p / (1.0 - p))
    if label is HittingRegime.METASTABLE_II:
        return math.log(n * math.log1p(n * p))
    return math.log(n * math.log(n * p / (1.0 - p)))


def hitting_regime(params: Params) -> RegimeEstimate:
    """Bucket ``p`` into the five hitting-time regimes and estimate the scale.

    The estimate is ``n ln n`` (the marginal mixing scale) plus the regime's
    escape term: ``n^c`` with ``c = p n^2 / ln n`` (super-classical),
    ``exp(n^2 p / (1-p))`` (I), ``(1 + np)^n`` (II), ``(np/(1-p))^n`` (III).
    Each escape term is floored at the previous regime's value on the shared
    edge, so the estimate never decreases in ``p``.
    """
    n, p = params.n, params.p
    if n < 2:
        raise DomainError("hitting regimes need n >= 2")
    if p >= 1.0:
        return RegimeEstimate(HittingRegime.INFINITE, LogValue(math.inf), False)
    mixing = LogValue(math.log(n * math.log(n)))
    if p == 0.0:
        return RegimeEstimate(HittingRegime.CLASSICAL, mixing, False)
    edges = _regime_edges(n)
    idx = next((i for i, e in enumerate(edges) if p <= e), len(edges))
    label = _ORDER[idx]
    # the escape term itself is a log, i.e. ln(ln escape) is what is stored
    ln_esc = _escape_ln(label, n, p)
    floor = -math.inf
    for i in range(1, idx + 1):
        floor = max(floor, _escape_ln(_ORDER[i - 1], n, edges[i - 1]))
    escape = LogValue(math.exp(max(ln_esc, floor))) if idx else ZERO
    boundary = label in (HittingRegime.SUPER_CLASSICAL, HittingRegime.METASTABLE_II)
    return RegimeEstimate(label, mixing + escape, boundary)


def escape_rate(params: Params, epsilon: float) -> EscapeBound:
    """Lower bound ``rho = q* (1 - epsilon) (1-p)^(n^2 ln n)`` on completing the
    collection within one block of ``ceil(n ln n)`` rounds from a good state."""
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    n, p = params.n, params.p
    qs = q_star(params)
    if p >= 1.0:
        rho = ZERO
    else:
        rho = LogValue(math.log(qs) + math.log1p(-epsilon) + n * n * math.log(n) * math.log1p(-p))
    good = math.ceil((1.0 - epsilon) * n * qs)
    return EscapeBound(rho, _block_len(n), good, epsilon)


def unconditional_upper_bound(params: Params, epsilon: float) -> LogValue:
    """Rigorous ``E[T] <= T_mix(epsilon) + ceil(n ln n) / rho``."""
    esc = escape_rate(params, epsilon)
    if esc.rho.ln_v == -math.inf:
        return LogValue(math.inf)
    t = marginal_mixing_time(params, epsilon)
    return LogValue(_ln(t)) + LogValue(math.log(esc.block_len) - esc.rho.ln_v)


def unconditional_lower_bound(params: Params) -> LogValue:
    """Rigorous ``E[T] >= 1 / (5 q*^n)``."""
    qs = q_star(params)
    if qs <= 0.0:
        return LogValue(math.inf)
    return LogValue(-math.log(5.0) - params.n * math.log(qs))


def metastability_deviation_bound(params: Params, delta: float, window: int,
                                  variant: str = "small_p") -> MetastabilityBound:
    """Probability bound on leaving the metastable band within ``window`` rounds.

    ``small_p``: ``2 L exp(-delta^2 (1-delta) n q* / 3)`` for the event
    ``| |S_t| - n q* | > 2 delta n q*``.
    ``large_p``: ``L exp(-delta^2 n / 4)`` for the event ``|S_t| > delta n``.
    Values above 1 are returned unchanged and reported as vacuous.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window}")
    n = params.n
    if variant == "small_p":
        ln_b = math.log(2.0 * window) - delta**2 * (1.0 - delta) * n * q_star(params) / 3.0
    elif variant == "large_p":
        ln_b = math.log(window) - delta**2 * n / 4.0
    else:
        raise DomainError(f"unknown variant {variant!r}")
    return MetastabilityBound(delta, window, LogValue(ln_b), variant)


def default_variant(params: Params) -> str:
    """``small_p`` while ``np <= 10`` (q* bounded away from 0), else ``large_p``."""
    return "small_p" if params.n * params.p <= CONSTANT_MAX_NP else "large_p"
