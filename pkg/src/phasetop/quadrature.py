"""Quadrature rules on triangles and edges.

Triangle rules are built from a tensor Gauss-Legendre rule collapsed onto
the reference triangle (Duffy transform).  An n-point rule per direction
integrates total degree 2n-2 exactly on the triangle, so arbitrary
polynomial exactness is available; exactness is pinned down by tests
against the factorial formula for barycentric monomials.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def triangle_rule(degree: int):
    """Rule exact for polynomials of total degree <= degree on a triangle.

    Returns (bary, weights) where bary has shape (nq, 3) (barycentric
    coordinates) and weights sum to 1, so that for an affine triangle T,
    integral_T f = |T| * sum_q w_q f(x_q).
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    # Duffy map (u, v) -> (u, v(1-u)) with Jacobian (1-u): polynomial of
    # total degree d becomes degree <= d+1 per direction, so n Gauss points
    # need 2n-1 >= d+1.
    n = max(1, (degree + 3) // 2)
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    uu, vv = np.meshgrid(u, u, indexing="ij")
    ww = np.outer(wu * (1.0 - u), wu)
    xs = uu.ravel()
    ys = (vv * (1.0 - uu)).ravel()
    weights = 2.0 * ww.ravel()  # normalize: reference triangle area is 1/2
    bary = np.column_stack([1.0 - xs - ys, xs, ys])
    bary.setflags(write=False)
    weights.setflags(write=False)
    return bary, weights


@lru_cache(maxsize=None)
def edge_rule(degree: int):
    """Gauss rule on [0, 1] exact for degree <= degree; weights sum to 1."""
    n = max(1, (degree + 2) // 2)
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    t.setflags(write=False)
    wt.setflags(write=False)
    return t, wt
