"""Compiled and pure-Python kernels must agree: bit-for-bit on simulation,
to rounding on the solver."""
import numpy as np
import pytest

from careless import _pykernels
from careless.simulate import bit_generator

cy = pytest.importorskip("careless._kernels")

CASES = [(1, 0.0), (2, 0.1), (5, 0.5), (8, 0.93), (30, 0.02), (12, 1.0)]


def test_backend_selection_names():
    from careless import BACKEND
    assert BACKEND in ("cython", "python")
    assert cy.NAME == "cython" and _pykernels.NAME == "python"


@pytest.mark.parametrize("n,p", CASES)
def test_transition_rows_agree(n, p):
    for k in range(n + 1):
        np.testing.assert_allclose(cy.transition_row(n, p, k), _pykernels.transition_row(n, p, k),
                                   rtol=1e-14, atol=1e-300)


@pytest.mark.parametrize("n,p", [c for c in CASES if c[1] < 1] + [(200, 0.3), (500, 0.001)])
def test_solver_agrees(n, p):
    a, b = cy.hessenberg_solve(n, p), _pykernels.hessenberg_solve(n, p)
    fin = np.isfinite(a)
    np.testing.assert_array_equal(fin, np.isfinite(b))
    np.testing.assert_allclose(a[fin], b[fin], rtol=1e-12)


@pytest.mark.parametrize("n,p", CASES)
def test_residual_agrees(n, p):
    if p >= 1:
        return
    h = _pykernels.hessenberg_solve(n, p)
    # both are rounding-level; compare on the scale of h
    scale = 1e-14 * max(1.0, float(h.max())) * n
    assert abs(cy.residual_inf(n, p, h) - _pykernels.residual_inf(n, p, h)) <= scale


@pytest.mark.parametrize("n,p", CASES + [(50, 0.7)])
def test_reduced_kernels_bit_identical(n, p):
    for seed in range(3):
        a = cy.reduced_trajectory(bit_generator(seed), n, p, 400)
        b = _pykernels.reduced_trajectory(bit_generator(seed), n, p, 400)
        np.testing.assert_array_equal(a, b)
        assert (cy.reduced_hitting_time(bit_generator(seed), n, p, 5000)
                == _pykernels.reduced_hitting_time(bit_generator(seed), n, p, 5000))
        np.testing.assert_array_equal(cy.reduced_step_counts(bit_generator(seed), n, p, n // 2, 500),
                                      _pykernels.reduced_step_counts(bit_generator(seed), n, p,
                                                                     n // 2, 500))


def test_binomial_fallback_path_bit_identical():
    # m * log1p(-q) below the pmf floor switches to summed Bernoulli draws
    n, p = 3000, 0.4
    a = cy.reduced_trajectory(bit_generator(1), n, p, 50)
    b = _pykernels.reduced_trajectory(bit_generator(1), n, p, 50)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("n,p", CASES)
def test_full_kernels_bit_identical(n, p):
    for seed in range(3):
        np.testing.assert_array_equal(cy.full_trajectory(bit_generator(seed), n, p, 200),
                                      _pykernels.full_trajectory(bit_generator(seed), n, p, 200))
        np.testing.assert_array_equal(cy.full_state(bit_generator(seed), n, p, 37),
                                      _pykernels.full_state(bit_generator(seed), n, p, 37))


@pytest.mark.parametrize("n,p1,p2", [(4, 0.0, 0.3), (7, 0.2, 0.2), (9, 0.1, 0.8), (3, 0.5, 1.0)])
def test_coupled_kernels_bit_identical(n, p1, p2):
    for seed in range(5):
        assert (cy.coupled_run(bit_generator(seed), n, p1, p2, 3000)
                == _pykernels.coupled_run(bit_generator(seed), n, p1, p2, 3000))


def test_streams_continue_identically():
    # after a kernel call both backends leave the generator in the same state
    g1, g2 = bit_generator(77), bit_generator(77)
    cy.reduced_trajectory(g1, 10, 0.2, 100)
    _pykernels.reduced_trajectory(g2, 10, 0.2, 100)
    assert g1.random_raw() == g2.random_raw()


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys
    env = dict(os.environ, CARELESS_PURE_PYTHON="1")
    code = ("import careless, careless.hitting as h; from careless.chain import Params; "
            "print(careless.BACKEND, h.expected_hitting_time(Params(3, 0.0)))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out[0] == "python" and float(out[1]) == pytest.approx(5.5)
