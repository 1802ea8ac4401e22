"""Exact expected hitting times of the full collection.

``h(k)`` is the expected number of rounds to reach ``n`` coupons from ``k``;
``h(0)`` is the expected completion time.  :func:`solve_hitting_times` runs the
O(n^2) banded elimination; :func:`dense_oracle_solve` is an O(n^3) dense
reference used to check it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .chain import Params, transition_matrix
from .errors import DomainError, NonAbsorbingError

ORACLE_MAX_N = 2000
RESIDUAL_RTOL = 1e-8


@dataclass
class HittingSolution:
    h: np.ndarray
    residual_inf: float
    method: str
    overflow: bool = False

    @property
    def h0(self) -> float:
        return float(self.h[0])

    @property
    def residual_ok(self) -> bool:
        if self.overflow:
            return False
        return bool(self.residual_inf <= RESIDUAL_RTOL * max(1.0, float(np.max(self.h))))


def _check(params: Params) -> None:
    if params.p >= 1.0:
        raise NonAbsorbingError()


def _finish(params: Params, h: np.ndarray, method: str) -> HittingSolution:
    finite = np.isfinite(h)
    if finite.all():
        return HittingSolution(h, float(kernels.residual_inf(params.n, params.p, h)), method)
    h = np.where(finite, h, math.inf)
    return HittingSolution(h, math.nan, method, overflow=True)


def solve_hitting_times(params: Params) -> HittingSolution:
    """Solve ``(I - Q) h = 1`` by Hessenberg forward elimination and
    bidiagonal back substitution.

    Entries beyond the double range come back as ``inf`` with
    ``overflow=True``; use :mod:`careless.bounds` for log-scale estimates
    there.
    """
    _check(params)
    h = np.asarray(kernels.hessenberg_solve(params.n, params.p), dtype=float)
    return _finish(params, h, "hessenberg")


def expected_hitting_time(params: Params) -> float:
    return solve_hitting_times(params).h0


def dense_oracle_solve(params: Params) -> HittingSolution:
    """Reference solve on the dense matrix, O(n^3).

    Eliminates transient states one at a time (state reduction), always
    taking the remaining state with the largest pivot.  Each pivot is the
    off-diagonal mass of its row in the reduced chain, so every update adds
    non-negative terms and nothing cancels.  Row-pivoted LU on ``I - Q``
    loses all accuracy once ``h`` exceeds about ``1/eps``.
    """
    _check(params)
    n = params.n
    if n > ORACLE_MAX_N:
        raise DomainError(f"dense oracle limited to n <= {ORACLE_MAX_N}, got {n}")
    # rows: transient states; columns: transient states + absorbing state
    W = transition_matrix(params)[:n, :].copy()
    np.fill_diagonal(W, 0.0)
    reward = np.ones(n)
    alive = list(range(n))
    eliminated = []
    with np.errstate(all="ignore"):
        while alive:
            m = len(alive)
            mass = W.sum(axis=1)
            j = int(np.argmax(mass))
            eliminated.append((alive[j], list(alive), W[j].copy(), mass[j], reward[j]))
            keep = [i for i in range(m) if i != j]
            into_j = W[keep, j]
            row_j = W[j, keep + [m]]
            reward = reward[keep] + into_j * (reward[j] / mass[j])
            W = W[np.ix_(keep, keep + [m])] + np.outer(into_j / mass[j], row_j)
            np.fill_diagonal(W, 0.0)
            alive = [alive[i] for i in keep]
        h = np.zeros(n + 1)
        for state, cols, row, mass_j, r_j in reversed(eliminated):
            h[state] = (r_j + float(row @ h[cols + [n]])) / mass_j
    return _finish(params, h[:n], "dense_oracle")
