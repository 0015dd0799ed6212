import numpy as np
import pytest
import sympy as sm

from subspacenet import symbolic


def test_kernel_expression():
    assert sm.simplify(symbolic.kernel - sm.exp(-symbolic.d**2/(2*symbolic.sigma**2))) == 0
    dists = np.array([0.0, 0.1, 0.33])
    np.testing.assert_allclose(symbolic.eval_kernel(dists, 0.12), np.exp(-dists**2/(2*0.12**2)))


def test_exact_laplacian_spectrum():
    # star with three leaves: eigenvalues 0, 1, 1, 4
    w = np.zeros((4, 4))
    w[0, 1:] = w[1:, 0] = 1.0
    np.testing.assert_allclose(symbolic.exact_laplacian_spectrum(w), [0, 1, 1, 4], atol=1e-12)


def test_exact_limit_point_basis_invariant():
    span = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]])
    other = span @ np.array([[2.0, 1.0], [0.0, 3.0]])
    sigma2_u = [1.0, 2.0, 0.5]
    w_star = [3.0, -1.0, 2.0]
    a = symbolic.exact_limit_point(span, sigma2_u, w_star)
    b = symbolic.exact_limit_point(other, sigma2_u, w_star)
    assert sm.simplify(a - b) == sm.zeros(3, 1)


def test_scalar_noise_variance():
    assert symbolic.scalar_noise_variance(3.0, 1/3, 2.0) == pytest.approx(73.0)
    expr = symbolic._noise_variance_expr()
    expected = 2*symbolic.s2u**2*symbolic.delta**2 + symbolic.s2u*symbolic.s2v
    assert sm.simplify(expr - expected) == 0
