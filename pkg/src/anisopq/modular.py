"""Modulars and Luxemburg norms of variable-exponent spaces on P1 fields.

Every integral uses one-point barycenter quadrature: the integrand is
evaluated at the element barycenter with the barycentric exponent and
multiplied by the element measure.
"""
from __future__ import annotations

import numpy as np

from .errors import NumericFailure, ZeroWeight
from .fields import ExponentField, GridFunction

DEFAULT_TOL = 1e-12
_MAX_DOUBLINGS = 200


def _modular(vals, expo, weights):
    a = np.abs(vals)
    return float(np.sum(weights * a ** expo))


def rho(u: GridFunction, r: ExponentField) -> float:
    """Modular of u: integral of |u|^r(z)."""
    return _modular(u.bary, r.bary, u.mesh.measures)


def rho_grad(u: GridFunction, r: ExponentField) -> float:
    """Modular of |Du|."""
    return _modular(u.grad_norms, r.bary, u.mesh.measures)


def _luxemburg(vals, expo, weights, tol):
    a = np.abs(vals)
    if not np.any(a * weights > 0):
        return 0.0

    def m(lam):
        return float(np.sum(weights * (a / lam) ** expo))

    r_lo = float(expo.min())
    guess = max(m(1.0), 1e-300) ** (1.0 / r_lo)
    lo = hi = guess
    for _ in range(_MAX_DOUBLINGS):
        if m(lo) >= 1.0:
            break
        lo *= 0.5
    else:
        raise NumericFailure("could not bracket the Luxemburg norm from below")
    for _ in range(_MAX_DOUBLINGS):
        if m(hi) <= 1.0:
            break
        hi *= 2.0
    else:
        raise NumericFailure("could not bracket the Luxemburg norm from above")
    # lambda -> m(lambda) is strictly decreasing, so bisection cannot fail
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if m(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def luxemburg_norm(u: GridFunction, r: ExponentField, tol: float = DEFAULT_TOL) -> float:
    """inf{lam > 0 : rho_r(u/lam) <= 1}, by bracketing and bisection."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _luxemburg(u.bary, r.bary, u.mesh.measures, tol)


def luxemburg_norm_grad(u: GridFunction, r: ExponentField, tol: float = DEFAULT_TOL) -> float:
    """Luxemburg norm of |Du| (the W_0^{1,r} norm)."""
    return _luxemburg(u.grad_norms, r.bary, u.mesh.measures, tol)


def weighted_luxemburg_norm(
    u: GridFunction, theta: GridFunction, p: ExponentField, tol: float = DEFAULT_TOL
) -> float:
    """Luxemburg norm for the weighted modular: integral of theta |u/lam|^p."""
    w = theta.bary
    if np.any(w < 0):
        raise ValueError("weight must be nonnegative")
    if not np.any(w > 0):
        raise ZeroWeight("weight vanishes at every barycenter")
    return _luxemburg(u.bary, p.bary, u.mesh.measures * w, tol)


def holder_pair(u: GridFunction, v: GridFunction, r: ExponentField, tol: float = DEFAULT_TOL):
    """Both sides of the variable-exponent Hoelder inequality.

    Returns (integral of |uv|, (1/r_- + 1/r'_-) ||u||_r ||v||_r').  The
    conjugate norm uses the exact conjugate of the barycentric exponent so
    that the discrete inequality holds for the quadrature measure.
    """
    meas = u.mesh.measures
    lhs = float(np.sum(meas * np.abs(u.bary * v.bary)))
    re = r.bary
    coef = 1.0 / r.r_minus + 1.0 / r.conjugate().r_minus
    nu = _luxemburg(u.bary, re, meas, tol)
    nv = _luxemburg(v.bary, re / (re - 1.0), meas, tol)
    return lhs, coef * nu * nv
