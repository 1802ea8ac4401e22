"""Pure-Python kernels, used when the compiled ``_kernels`` module is absent.

Signatures and random-draw order match ``_kernels.pyx`` exactly; the
simulation kernels return bit-identical results for the same bit generator
state.  ``bitgen`` arguments are :class:`numpy.random.BitGenerator` objects.
"""
import numpy as np

from .chain import _row_probs, draw_coupon, sample_binomial

NAME = "python"


def transition_row(n, p, k):
    return _row_probs(n, p, k)


def hessenberg_solve(n, p):
    """Expected hitting times ``h(0..n-1)``; non-finite entries mean overflow.

    Column elimination of the banded system collapses to one cumulative sum
    and one dot product per row: after eliminating columns ``0..c`` the
    entry ``A[r, c+1]`` is minus the cumulative row mass ``P[r, 0..c+1]``.
    Pivots are the up-step probabilities ``P[c, c+1]`` (the row sums of the
    partially eliminated system), never a difference of O(1) numbers.
    """
    exit_prob = np.empty(n)
    tau = np.empty(n)  # expected rounds to climb from c to c+1
    with np.errstate(all="ignore"):
        for r in range(n):
            row = _row_probs(n, p, r)
            exit_prob[r] = row[r + 1]
            b = 1.0
            if r:
                b += float(np.cumsum(row[:r]) @ tau[:r])
            tau[r] = b / exit_prob[r]
        h = np.cumsum(tau[::-1])[::-1]
    return h


def residual_inf(n, p, h):
    """``max_k |(A h)_k - 1|`` against freshly rebuilt rows."""
    h = np.asarray(h, dtype=float)
    worst = 0.0
    with np.errstate(all="ignore"):
        for r in range(n):
            row = _row_probs(n, p, r)
            res = abs(h[r] - float(row[:n] @ h) - 1.0)
            if not res <= worst:
                worst = res
    return worst


def reduced_hitting_time(bitgen, n, p, max_steps):
    rng = np.random.Generator(bitgen)
    k = 0
    for t in range(1, max_steps + 1):
        m = k + 1 if rng.random() * n >= k else k
        k = m - sample_binomial(m, p, rng)
        if k == n:
            return t
    return -1


def reduced_trajectory(bitgen, n, p, horizon):
    rng = np.random.Generator(bitgen)
    sizes = np.zeros(horizon + 1, dtype=np.int64)
    k = 0
    for t in range(1, horizon + 1):
        m = k + 1 if rng.random() * n >= k else k
        k = m - sample_binomial(m, p, rng)
        sizes[t] = k
    return sizes


def reduced_step_counts(bitgen, n, p, k, samples):
    """Histogram over ``0..n`` of ``samples`` independent one-round moves from ``k``."""
    rng = np.random.Generator(bitgen)
    counts = np.zeros(n + 1, dtype=np.int64)
    for _ in range(samples):
        m = k + 1 if rng.random() * n >= k else k
        counts[m - sample_binomial(m, p, rng)] += 1
    return counts


def _full_step(owned, n, p, rng):
    c = draw_coupon(n, rng.random())
    gained = not owned[c]
    owned[c] = True
    lost = 0
    for i in range(n):
        if owned[i] and rng.random() < p:
            owned[i] = False
            lost += 1
    return gained - lost


def full_trajectory(bitgen, n, p, horizon):
    rng = np.random.Generator(bitgen)
    owned = [False] * n
    sizes = np.zeros(horizon + 1, dtype=np.int64)
    k = 0
    for t in range(1, horizon + 1):
        k += _full_step(owned, n, p, rng)
        sizes[t] = k
    return sizes


def full_state(bitgen, n, p, t):
    rng = np.random.Generator(bitgen)
    owned = [False] * n
    for _ in range(t):
        _full_step(owned, n, p, rng)
    return np.array(owned, dtype=np.uint8)


def coupled_run(bitgen, n, p1, p2, max_steps):
    """Two full chains on shared draws; returns ``(t1, t2, inclusion_held)``.

    Every round uses one coupon uniform plus one uniform ``U_i`` per coupon
    index (held or not), so both chains see identical randomness.  Coupon
    ``i`` is lost in chain ``j`` when ``U_i < p_j``.
    """
    rng = np.random.Generator(bitgen)
    s1 = [False] * n
    s2 = [False] * n
    k1 = k2 = 0
    t1 = t2 = -1
    held = True
    for t in range(1, max_steps + 1):
        c = draw_coupon(n, rng.random())
        if not s1[c]:
            s1[c] = True
            k1 += 1
        if not s2[c]:
            s2[c] = True
            k2 += 1
        for i in range(n):
            u = rng.random()
            if s1[i] and u < p1:
                s1[i] = False
                k1 -= 1
            if s2[i] and u < p2:
                s2[i] = False
                k2 -= 1
            if s2[i] and not s1[i]:
                held = False
        if t1 < 0 and k1 == n:
            t1 = t
        if t2 < 0 and k2 == n:
            t2 = t
        if t1 >= 0 and t2 >= 0:
            break
    return t1, t2, held
