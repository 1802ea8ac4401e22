import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from careless.bounds import (ZERO, HittingRegime, LogValue, default_variant, escape_rate,
                             hitting_regime, mean_field_interval,
                             metastability_deviation_bound, unconditional_lower_bound,
                             unconditional_upper_bound)
from careless.chain import Params
from careless.errors import DomainError
from careless.hitting import expected_hitting_time
from careless.marginal import marginal_mixing_time, q_star

mp.mp.dps = 50

finite = st.floats(-700.0, 700.0)


@settings(max_examples=200)
@given(finite, finite)
def test_logvalue_add_is_logsumexp(a, b):
    s = LogValue(a) + LogValue(b)
    assert s.ln_v == pytest.approx(float(mp.log(mp.e**a + mp.e**b)), rel=1e-14, abs=1e-14)
    assert (LogValue(a) * LogValue(b)).ln_v == a + b


def test_logvalue_basics():
    assert LogValue.of(0.0) == ZERO and ZERO.value == 0.0
    assert (ZERO + LogValue.of(3.0)).value == pytest.approx(3.0)
    assert LogValue(1e4).value == math.inf
    assert LogValue.of(1000.0).log10 == pytest.approx(3.0)
    assert LogValue(1.0) < LogValue(2.0) and max(LogValue(5.0), LogValue(-1.0)).ln_v == 5.0
    with pytest.raises(DomainError):
        LogValue.of(-1.0)


def test_mean_field_two_coupons():
    params = Params(2, 0.1)
    qs = q_star(params)
    mf = mean_field_interval(params, 0.1 * qs)
    assert mf.t_mix == 3 and mf.heuristic
    assert mf.upper.value == pytest.approx(3 + (0.9 * qs) ** -2, rel=1e-12)
    assert mf.upper.value == pytest.approx(4.844, abs=1e-3)
    assert mf.lower <= mf.upper
    assert expected_hitting_time(params) < mf.upper.value


def test_mean_field_no_loss_degenerate():
    mf = mean_field_interval(Params(10, 0.0), 0.1)
    assert mf.lower_clamped
    T = mf.t_mix
    assert mf.upper.value == pytest.approx(T + 0.9**-10, rel=1e-12)


def test_mean_field_upper_dominated_by_qstar_power():
    params = Params(10, 0.1)
    mf = mean_field_interval(params, 1e-9)
    assert mf.upper.ln_v == pytest.approx(
        math.log(mf.t_mix + (1.9 / 0.9) ** 10), rel=1e-6)
    assert (1.9 / 0.9) ** 10 == pytest.approx(math.exp(7.47), rel=1e-2)


@pytest.mark.parametrize("eps", [0.0, -0.1, 0.5])
def test_mean_field_rejects_eps(eps):
    with pytest.raises(DomainError):
        mean_field_interval(Params(2, 0.5), eps)  # q* = 1/3


def test_mean_field_rejects_p_one():
    with pytest.raises(DomainError):
        mean_field_interval(Params(2, 1.0), 0.1)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 3000), st.floats(0.0, 0.999), st.floats(1e-6, 0.999))
def test_mean_field_ordering(n, p, rel):
    params = Params(n, p)
    mf = mean_field_interval(params, rel * q_star(params))
    assert mf.lower <= mf.upper


def _mf_direct(n, p, eps):
    qs = (1 - p) / (1 - p + n * p)
    a = (1 - p) * (1 - 1 / n)
    T = marginal_mixing_time(Params(n, p), eps)
    qn = qs**n
    lower = max(0.0, T * (1 - qn * T)) + (1 - qn) ** (T + 1) / qn
    upper = T + (qs - eps) ** -n
    rho = qs * (1 - eps) * (1 - p) ** (n * n * math.log(n))
    m = math.ceil(n * math.log(n))
    ub = T + m / rho
    lb = 1 / (5 * qn)
    return lower, upper, rho, ub, lb


@pytest.mark.parametrize("n", [2, 3, 5, 8, 10])
@pytest.mark.parametrize("p", [0.0, 0.05, 0.2, 0.5])
def test_log_space_matches_linear(n, p):
    params = Params(n, p)
    eps = 0.1 * q_star(params)
    lower, upper, rho, ub, lb = _mf_direct(n, p, eps)
    mf = mean_field_interval(params, eps)
    for got, want in [(mf.lower.ln_v, lower), (mf.upper.ln_v, upper),
                      (escape_rate(params, eps).rho.ln_v, rho),
                      (unconditional_upper_bound(params, eps).ln_v, ub),
                      (unconditional_lower_bound(params).ln_v, lb)]:
        if want == 0.0:
            assert got == -math.inf
        else:
            assert got == pytest.approx(math.log(want), rel=1e-10, abs=1e-12)


def test_escape_rate_examples():
    esc = escape_rate(Params(2, 0.1), 0.1)
    assert esc.rho.value == pytest.approx(0.5498, abs=1e-4)
    assert esc.block_len == 2 and esc.epsilon == 0.1
    for n in (2, 7, 40):
        e = escape_rate(Params(n, 0.0), 0.25)
        assert e.rho.value == pytest.approx(0.75, rel=1e-15)
        assert e.block_len == math.ceil(n * math.log(n))
        assert e.good_threshold == math.ceil(0.75 * n)


def test_escape_rate_large_loss_in_log_space():
    # evaluated independently with mpmath; q* = 0.5/5.5
    esc = escape_rate(Params(10, 0.5), 0.1)
    assert esc.rho.ln_v == pytest.approx(-162.10629230927442, rel=1e-12)
    assert esc.rho.value == pytest.approx(math.exp(-162.10629230927442), rel=1e-10)


@settings(max_examples=100)
@given(st.integers(1, 10_000), st.floats(0.0, 0.999), st.floats(1e-6, 0.999))
def test_escape_rate_in_unit_interval(n, p, eps):
    rho = escape_rate(Params(n, p), eps).rho
    assert rho.ln_v <= 0.0


def test_upper_bound_examples():
    assert unconditional_upper_bound(Params(2, 0.1), 0.1).value == pytest.approx(6.6375, abs=1e-3)
    ub3 = unconditional_upper_bound(Params(3, 0.0), 0.01)
    T = marginal_mixing_time(Params(3, 0.0), 0.01)
    assert ub3.value == pytest.approx(T + math.ceil(3 * math.log(3)) / 0.99, rel=1e-12)
    assert ub3.value > 5.5
    # mpmath reference for (10, 0.5, 0.1)
    assert unconditional_upper_bound(Params(10, 0.5), 0.1).log10 == pytest.approx(
        71.782079473425037, rel=1e-12)


@pytest.mark.parametrize("n,p,lb", [(5, 0.0, 0.2), (2, 0.5, 1.8), (2, 0.1, 0.29877)])
def test_lower_bound_examples(n, p, lb):
    assert unconditional_lower_bound(Params(n, p)).value == pytest.approx(lb, rel=1e-4)


def test_lower_bound_p_one_infinite():
    assert unconditional_lower_bound(Params(4, 1.0)).ln_v == math.inf


@pytest.mark.parametrize("n", range(2, 13))
@pytest.mark.parametrize("p", [0.05, 0.1, 0.2, 0.3, 0.5])
def test_rigorous_sandwich(n, p):
    params = Params(n, p)
    h0 = expected_hitting_time(params)
    eps = 0.1 * q_star(params)
    assert unconditional_lower_bound(params).value <= h0 <= unconditional_upper_bound(params, eps).value


def test_regime_examples():
    r = hitting_regime(Params(100, 0.0))
    assert r.label is HittingRegime.CLASSICAL and r.scale.value == pytest.approx(460.517, rel=1e-5)
    r = hitting_regime(Params(100, 0.01))
    assert r.label is HittingRegime.METASTABLE_II and r.boundary
    assert r.scale.ln_v == pytest.approx(100 * math.log(2), rel=1e-12)
    assert r.log10_scale == pytest.approx(30.1, abs=0.01)
    r = hitting_regime(Params(100, 0.5))
    assert r.label is HittingRegime.METASTABLE_III
    assert r.scale.ln_v == pytest.approx(100 * math.log(100), rel=1e-12)
    assert hitting_regime(Params(100, 1.0)).label is HittingRegime.INFINITE


def test_regime_buckets_in_order():
    n = 10_000
    labels = [hitting_regime(Params(n, p)).label for p in
              (1e-12, math.log(n) / n**2, 1e-6, 1 / n, 0.5)]
    assert labels == [HittingRegime.CLASSICAL, HittingRegime.SUPER_CLASSICAL,
                      HittingRegime.METASTABLE_I, HittingRegime.METASTABLE_II,
                      HittingRegime.METASTABLE_III]


def test_regime_needs_two_coupons():
    with pytest.raises(DomainError):
        hitting_regime(Params(1, 0.1))


@pytest.mark.parametrize("n", [2, 3, 10, 100, 1000, 10**5])
def test_regime_scale_nondecreasing_in_p(n):
    ps = np.concatenate([[0.0], np.logspace(-14, -1e-9, 3000)])
    scales = [hitting_regime(Params(n, float(p))).scale.ln_v for p in ps]
    assert all(b >= a for a, b in zip(scales, scales[1:]))


def test_metastability_examples():
    b = metastability_deviation_bound(Params(1000, 1e-3), 0.3, 100, "small_p")
    assert b.prob_bound.value == pytest.approx(5.5e-3, rel=0.02)
    assert not b.vacuous
    b = metastability_deviation_bound(Params(400, 0.5), 0.5, 10, "large_p")
    assert b.prob_bound.value == pytest.approx(10 * math.exp(-25), rel=1e-12)
    b = metastability_deviation_bound(Params(10, 0.1), 0.1, 10**6, "small_p")
    assert b.vacuous and b.prob_bound.value > 1


def test_metastability_formula_exact():
    params = Params(300, 2 / 300)
    qs = q_star(params)
    b = metastability_deviation_bound(params, 0.2, 10_000, "small_p")
    assert b.prob_bound.ln_v == pytest.approx(math.log(2e4) - 0.04 * 0.8 * 300 * qs / 3, rel=1e-14)
    b = metastability_deviation_bound(params, 0.99, 7, "large_p")
    assert b.prob_bound.ln_v == pytest.approx(math.log(7) - 0.99**2 * 300 / 4, rel=1e-14)


@pytest.mark.parametrize("delta,window,variant", [(0.0, 1, "small_p"), (1.0, 1, "small_p"),
                                                  (0.5, 0, "small_p"), (0.5, 1, "medium")])
def test_metastability_domain(delta, window, variant):
    with pytest.raises(DomainError):
        metastability_deviation_bound(Params(10, 0.1), delta, window, variant)


def test_default_variant():
    assert default_variant(Params(100, 0.01)) == "small_p"
    assert default_variant(Params(100, 0.5)) == "large_p"
