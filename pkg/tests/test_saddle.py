import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_pfa.saddle import (
    build_m_r,
    eigenvalues,
    hessian_nonzero_product,
    hessian_nonzero_product_numeric,
    numeric_eigenvalues,
    sine_product,
    sine_product_direct,
)


@pytest.mark.parametrize("mu", [0.0, 0.2, 0.5])
def test_single_round_trip_matrix(mu):
    np.testing.assert_array_equal(build_m_r(1, mu).entries, [[1, -1], [-1, 1]])


def test_two_round_trip_matrix():
    m = build_m_r(2, 0.3).entries
    expected = np.array(
        [
            [1, -0.7, 0, -0.3],
            [-0.7, 1, -0.3, 0],
            [0, -0.3, 1, -0.7],
            [-0.3, 0, -0.7, 1],
        ]
    )
    np.testing.assert_allclose(m, expected, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.floats(0.0, 0.5))
def test_matrix_structure(r, mu):
    m = build_m_r(r, mu).entries
    assert m.shape == (2 * r, 2 * r)
    np.testing.assert_allclose(m, m.T)
    np.testing.assert_allclose(m.sum(axis=1), 0.0, atol=1e-14)


@pytest.mark.parametrize("r,mu", [(0, 0.3), (2, -0.1), (2, 0.6), (1.5, 0.3)])
def test_domain_errors(r, mu):
    with pytest.raises(ValueError):
        build_m_r(r, mu)


def test_eigenvalue_examples():
    np.testing.assert_allclose(eigenvalues(1, 0.3), [0, 2], atol=1e-15)
    np.testing.assert_allclose(eigenvalues(2, 0.5), [0, 1, 1, 2], atol=1e-15)


@pytest.mark.parametrize("r", range(1, 9))
@pytest.mark.parametrize("mu", [0.0, 0.1, 0.3, 0.5])
def test_eigenvalues_match_diagonalisation(r, mu):
    np.testing.assert_allclose(eigenvalues(r, mu), numeric_eigenvalues(r, mu), atol=1e-12)


@pytest.mark.parametrize("r", [2, 3, 7])
def test_small_mu_limit(r):
    R1, R2 = 1.0, 1e9
    mu = R1 / (R1 + R2)
    lam = eigenvalues(r, mu)
    j = np.arange(r)
    # the r smallest eigenvalues form the lambda_minus family
    lower = (R1 + R2) * lam[:r]
    np.testing.assert_allclose(lower, np.sort(2 * R1 * np.sin(np.pi * j / r) ** 2), rtol=1e-6, atol=1e-12)
    np.testing.assert_allclose(lam[r:], 2.0, rtol=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10), st.floats(1e-6, 0.5))
def test_single_zero_eigenvalue(r, mu):
    lam = eigenvalues(r, mu)
    assert lam[0] == 0
    assert np.all(lam[1:] > 0)


def test_sine_product_examples():
    assert sine_product(1) == 1
    assert sine_product(3) == pytest.approx(0.75, rel=1e-15)
    assert sine_product(6) == pytest.approx(0.1875, rel=1e-15)


@pytest.mark.parametrize("r", range(1, 31))
def test_sine_product_identity(r):
    assert sine_product_direct(r) == pytest.approx(r / 2 ** (r - 1), rel=1e-14)


@pytest.mark.parametrize(
    "r,R1,R2",
    [(1, 1.0, 1.0), (1, 2.0, 5.0), (3, 1.0, 3.0), (5, 3.0, 7.0), (8, 1.0, 1.0)],
)
def test_hessian_product_closed_form(r, R1, R2):
    mu = R1 / (R1 + R2)
    k, kappa = 0.8, 1.3
    closed = hessian_nonzero_product(r, mu, R1, R2, k, kappa)
    brute = hessian_nonzero_product_numeric(r, mu, R1, R2, k, kappa)
    assert closed == pytest.approx(brute, rel=1e-12)


def test_hessian_product_radius_scaling():
    # times (R1 R2)^r / R_eff depends on mu only
    r, mu = 4, 0.3
    vals = []
    for scale in (1.0, 7.0, 1e3):
        R1, R2 = 3.0 * scale, 7.0 * scale
        reff = R1 * R2 / (R1 + R2)
        vals.append(hessian_nonzero_product(r, mu, R1, R2, 0.5, 2.0) * (R1 * R2) ** r / reff)
    np.testing.assert_allclose(vals, vals[0], rtol=1e-13)


def test_hessian_errors():
    with pytest.raises(ValueError):
        hessian_nonzero_product(2, 0.5, 1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        hessian_nonzero_product(2, 0.5, 1.0, 1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        hessian_nonzero_product(2, 0.5, 1.0, math.inf, 1.0, 2.0)
    with pytest.raises(ValueError):
        hessian_nonzero_product(2, 0.3, 1.0, 1.0, 1.0, 2.0)
