import functools

import numpy as np
import sympy as sm
from sympy import stats

# Kernel parameters
d, sigma = sm.symbols('d sigma', positive=True)  # d - node distance, sigma - kernel width
# Regression model (scalar agent, L=1)
s2u, s2v = sm.symbols('sigma2_u sigma2_v', positive=True)
delta = sm.symbols('delta', real=True)  # w_star - w_o
lam = sm.symbols('lambda')

# Gaussian kernel, thresholding is applied by the caller
kernel = sm.exp(-d**2/(2*sigma**2))
f_kernel = sm.lambdify((d, sigma), kernel, "numpy")


def eval_kernel(dists, sigma_val):
    return np.asarray(f_kernel(np.asarray(dists, dtype=float), float(sigma_val)), dtype=float)


def _rational(a):
    return sm.Matrix(np.atleast_2d(a).tolist()).applyfunc(lambda x: sm.nsimplify(x, rational=True))


def exact_laplacian_spectrum(weights):
    """Eigenvalues of diag(C1) - C from the roots of the characteristic polynomial."""
    C = _rational(weights)
    Lc = sm.diag(*[sum(C.row(k)) for k in range(C.rows)]) - C
    poly = sm.Poly(Lc.charpoly(lam).as_expr(), lam)
    roots = [r.evalf(30) for r in sm.real_roots(poly)]
    return np.sort(np.array(roots, dtype=float))


def exact_limit_point(graph_span, sigma2_u, w_star):
    """W° = U (U^T H U)^-1 U^T H W* for L=1, in exact arithmetic.

    Any basis spanning the subspace works; W° depends only on range(U).
    """
    U = _rational(graph_span)
    if U.rows == 1:
        U = U.T
    H = sm.diag(*[sm.nsimplify(x, rational=True) for x in np.ravel(sigma2_u)])
    w = _rational(np.ravel(w_star)).T
    return U*(U.T*H*U).inv()*U.T*H*w


@functools.lru_cache(maxsize=None)
def _noise_variance_expr():
    # s = (u^2 - sigma2_u) delta + u v for independent zero-mean Gaussians
    u = stats.Normal('u', 0, sm.sqrt(s2u))
    v = stats.Normal('v', 0, sm.sqrt(s2v))
    s = (u**2 - s2u)*delta + u*v
    return sm.simplify(stats.E(sm.expand(s**2)))


def scalar_noise_variance(sigma2_u, sigma2_v, delta_val):
    expr = _noise_variance_expr()
    return float(expr.subs({s2u: sigma2_u, s2v: sigma2_v, delta: delta_val}))
