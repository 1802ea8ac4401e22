"""The careless collector chain: instance parameters, transition rows, steps.

Each round one coupon type is drawn uniformly from ``{1..n}`` and added to the
collection, then every held coupon (the new one included) is lost
independently with probability ``p``.  The count ``K_t = |S_t|`` is itself a
Markov chain on ``{0..n}`` whose transition matrix is lower Hessenberg: the
count can grow by at most one per round.

Random draws
------------
All samplers take a :class:`numpy.random.Generator` and consume it through
``Generator.random()`` only, in a fixed order, so the compiled kernels (which
read the same PCG64 stream through ``next_double``) reproduce them exactly.

* coupon draw: ``c = floor(u * n)``, one uniform;
* loss of coupon ``i``: ``u < p``, one uniform per held coupon, in ascending
  coupon order;
* ``Binomial(m, p)`` in the count chain: inverse-CDF walk from 0 with one
  uniform, on ``min(p, 1-p)`` (mirrored when ``p > 1/2``); when ``(1-q)**m``
  would underflow, ``m`` Bernoulli uniforms are summed instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonAbsorbingError

# below this, (1-q)**m underflows and inverse-CDF sampling is unusable
_LOG_PMF0_FLOOR = -700.0


@dataclass(frozen=True)
class Params:
    """A problem instance: ``n`` coupon types, per-round loss probability ``p``."""

    n: int
    p: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        p = float(self.p)
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class FullState:
    """Set of held coupon indices, each in ``1..n``."""

    owned: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "owned", frozenset(self.owned))

    def validate(self, n: int) -> None:
        bad = [i for i in self.owned if not (isinstance(i, (int, np.integer)) and 1 <= i <= n)]
        if bad:
            raise DomainError(f"coupon indices out of 1..{n}: {sorted(bad)}")

    def __len__(self):
        return len(self.owned)


@dataclass(frozen=True)
class ReducedTransitionRow:
    """Row ``k`` of the count-chain transition matrix (length ``n + 1``)."""

    k: int
    probs: np.ndarray


@dataclass
class ReducedChainSystem:
    """The system ``(I - Q) h = 1`` over transient states ``0..n-1``.

    Only the Hessenberg band is stored: ``lower[k]`` holds ``A[k, 0..k]`` and
    ``upper[k]`` holds ``A[k, k+1]`` (``k < n - 1``).  ``exit_prob[k]`` is
    ``P[k, k+1]``, the probability of moving up one state; for ``k = n - 1``
    that is the absorption probability, which has no column in ``A``.
    """

    params: Params
    lower: list
    upper: np.ndarray
    exit_prob: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.params.n

    def to_dense(self) -> np.ndarray:
        n = self.n
        A = np.zeros((n, n))
        for k in range(n):
            A[k, : k + 1] = self.lower[k]
            if k + 1 < n:
                A[k, k + 1] = self.upper[k]
        return A

    def matvec(self, h) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        out = np.empty(self.n)
        for k in range(self.n):
            s = float(self.lower[k] @ h[: k + 1])
            if k + 1 < self.n:
                s += self.upper[k] * h[k + 1]
            out[k] = s
        return out


def binomial_pmf(m: int, p: float) -> np.ndarray:
    """Probability mass of ``Binomial(m, p)`` on ``0..m``.

    Anchored at the mode with value 1 and extended outward by the ratio
    ``pmf[j+1] / pmf[j] = (m-j)/(j+1) * p/(1-p)``, then normalised.  No
    binomial coefficient or large power is ever formed, so any ``m`` works;
    entries far in the tails underflow to 0.
    """
    out = np.zeros(m + 1)
    if p <= 0.0:
        out[0] = 1.0
        return out
    if p >= 1.0:
        out[m] = 1.0
        return out
    mode = min(int((m + 1) * p), m)
    j = np.arange(m, dtype=float)
    ratio = (m - j) / (j + 1.0) * (p / (1.0 - p))
    out[mode] = 1.0
    if mode < m:
        out[mode + 1:] = np.cumprod(ratio[mode:])
    if mode > 0:
        out[:mode] = np.cumprod(1.0 / ratio[:mode][::-1])[::-1]
    return out / out.sum()


def _row_probs(n: int, p: float, k: int) -> np.ndarray:
    # gain with prob (n-k)/n, then lose Binomial(k+1, p); else lose Binomial(k, p)
    row = np.zeros(n + 1)
    if k < n:
        row[: k + 2] += ((n - k) / n) * binomial_pmf(k + 1, p)[::-1]
    if k > 0:
        row[: k + 1] += (k / n) * binomial_pmf(k, p)[::-1]
    return row


def build_transition_row(params: Params, k: int) -> ReducedTransitionRow:
    """Exact transition probabilities out of count state ``k``.

    ``probs[k - i]`` mixes "gained a new coupon, lost ``i + 1``" with
    "drew a held coupon, lost ``i``"; ``probs[k + 1]`` is a new coupon kept
    with nothing lost.

    >>> build_transition_row(Params(2, 0.1), 1).probs.round(6).tolist()
    [0.055, 0.54, 0.405]
    """
    if isinstance(k, bool) or int(k) != k or not 0 <= k <= params.n:
        raise DomainError(f"state index must lie in 0..{params.n}, got {k!r}")
    return ReducedTransitionRow(int(k), _row_probs(params.n, params.p, int(k)))


def build_reduced_system(params: Params) -> ReducedChainSystem:
    """Assemble ``A = I - Q`` and ``b = 1`` in banded form."""
    if params.p >= 1.0:
        raise NonAbsorbingError()
    n = params.n
    lower, upper, exit_prob = [], np.zeros(max(n - 1, 0)), np.zeros(n)
    for k in range(n):
        row = _row_probs(n, params.p, k)
        lo = -row[: k + 1]
        lo[k] += 1.0
        lower.append(lo)
        exit_prob[k] = row[k + 1]
        if k + 1 < n:
            upper[k] = -row[k + 1]
    return ReducedChainSystem(params, lower, upper, exit_prob, np.ones(n))


def transition_matrix(params: Params) -> np.ndarray:
    """Dense ``(n+1) x (n+1)`` count-chain transition matrix."""
    return np.vstack([_row_probs(params.n, params.p, k) for k in range(params.n + 1)])


def draw_coupon(n: int, u: float) -> int:
    """Map a uniform in ``[0, 1)`` to a 0-based coupon index."""
    c = int(u * n)
    return c if c < n else n - 1


def sample_binomial(m: int, p: float, rng: np.random.Generator) -> int:
    """Draw ``Binomial(m, p)``; see the module notes for the draw order."""
    if m == 0 or p == 0.0:
        return 0
    if p == 1.0:
        return m
    flip = p > 0.5
    q = 1.0 - p if flip else p
    if m * math.log1p(-q) > _LOG_PMF0_FLOOR:
        r = q / (1.0 - q)
        f = (1.0 - q) ** m
        cdf = f
        u = rng.random()
        j = 0
        while u >= cdf and j < m:
            f *= (m - j) / (j + 1) * r
            j += 1
            cdf += f
        x = j
    else:
        x = 0
        for _ in range(m):
            if rng.random() < q:
                x += 1
    return m - x if flip else x


def step_full(state: FullState, params: Params, rng: np.random.Generator) -> FullState:
    """One round of the set-valued chain.

    Consumes one uniform for the drawn coupon, then one per coupon of
    ``owned | {C_t}`` in ascending index order.
    """
    state.validate(params.n)
    c = draw_coupon(params.n, rng.random()) + 1
    p = params.p
    kept = [i for i in sorted(state.owned | {c}) if not rng.random() < p]
    return FullState(frozenset(kept))


def step_reduced(k: int, params: Params, rng: np.random.Generator) -> int:
    """One round of the count chain, without building the transition row."""
    n, p = params.n, params.p
    if not 0 <= k <= n:
        raise DomainError(f"state index must lie in 0..{n}, got {k!r}")
    m = k + 1 if rng.random() * n >= k else k
    return m - sample_binomial(m, p, rng)
