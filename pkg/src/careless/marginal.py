"""Marginal probability that a fixed coupon is held.

``q_t = Pr(i in S_t)`` obeys ``q_{t+1} = a q_t + b`` with
``a = (1-p)(1-1/n)`` and ``b = (1-p)/n``, so it converges geometrically to
``q* = (1-p) / (1-p+np)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .chain import Params
from .errors import DomainError

# np cutoffs separating the three q* regimes (heuristic, finite-n buckets)
NEAR_ONE_MAX_NP = 0.1
CONSTANT_MAX_NP = 10.0


@dataclass(frozen=True)
class MarginalModel:
    a: float
    b: float
    q_star: float


class QStarLabel(str, Enum):
    NEAR_ONE = "NearOne"
    CONSTANT = "Constant"
    VANISHING = "Vanishing"


@dataclass(frozen=True)
class QStarRegime:
    """Bucket of ``q*``; ``scale`` is the exact ``q*`` and ``c`` is ``n p``."""

    label: QStarLabel
    scale: float
    c: float


def q_star(params: Params) -> float:
    n, p = params.n, params.p
    return (1.0 - p) / (1.0 - p + n * p)


def marginal_coeffs(params: Params) -> MarginalModel:
    n, p = params.n, params.p
    a = (1.0 - p) * (1.0 - 1.0 / n)
    b = (1.0 - p) / n
    return MarginalModel(a=a, b=b, q_star=q_star(params))


def q_at(params: Params, t: int, q0: float = 0.0) -> float:
    """Closed form ``q_t = q* + a**t (q0 - q*)``."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if not 0.0 <= q0 <= 1.0:
        raise DomainError(f"q0 must lie in [0, 1], got {q0}")
    m = marginal_coeffs(params)
    if t == 0:
        return q0
    return m.q_star + m.a ** t * (q0 - m.q_star)


def marginal_mixing_time(params: Params, epsilon: float) -> int:
    """Smallest integer ``t`` with ``a**t * q* <= epsilon`` (start from ``q0 = 0``).

    Returns 0 when ``epsilon >= q*`` and when ``a = 0`` (``p = 1`` or
    ``n = 1``): the marginal is then exact after a single round.
    """
    if epsilon <= 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    m = marginal_coeffs(params)
    if epsilon >= m.q_star or m.a == 0.0:
        return 0
    t = max(0, math.ceil(math.log(m.q_star / epsilon) / -math.log(m.a)))
    # the float ceiling can be off by one either way
    while m.a ** t * m.q_star > epsilon:
        t += 1
    while t > 0 and m.a ** (t - 1) * m.q_star <= epsilon:
        t -= 1
    return t


def default_epsilon(params: Params) -> float:
    """Default mixing tolerance ``q*/n`` used by callers that do not pick one."""
    return q_star(params) / params.n


def classify_qstar_regime(params: Params) -> QStarRegime:
    """Bucket ``q*`` by ``c = n p``: ``<= 0.1`` near one, ``<= 10`` constant,
    otherwise vanishing like ``1/(n p)``."""
    c = params.n * params.p
    qs = q_star(params)
    if c <= NEAR_ONE_MAX_NP:
        label = QStarLabel.NEAR_ONE
    elif c <= CONSTANT_MAX_NP:
        label = QStarLabel.CONSTANT
    else:
        label = QStarLabel.VANISHING
    return QStarRegime(label=label, scale=qs, c=c)
