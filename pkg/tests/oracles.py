"""Reference computations written independently of the package.

Nothing here imports anisopq; meshes and quadratures are rebuilt by hand.
"""
import math

import numpy as np
from scipy.integrate import quad
from scipy.linalg import eigh


def integral_x_pow_2_plus_x():
    """High-order adaptive quadrature of int_0^1 x^(2+x) dx."""
    return quad(lambda x: x ** (2.0 + x), 0.0, 1.0, epsabs=1e-14, epsrel=1e-14)[0]


def p1_1d_generalized(n, weight=lambda x: 1.0):
    """Smallest eigenvalue of K u = lam M_w u on (0,1) with n cells.

    K is the P1 stiffness matrix, M_w the midpoint-rule mass matrix
    sum_e h w(x_e) ((u_i + u_{i+1}) / 2)^2 restricted to interior nodes.
    """
    h = 1.0 / n
    m = n - 1
    K = np.zeros((m, m))
    M = np.zeros((m, m))
    for e in range(n):
        nodes = [e - 1, e]  # interior indices of the element's end points
        w = weight((e + 0.5) * h)
        for a in range(2):
            for b in range(2):
                i, j = nodes[a], nodes[b]
                if 0 <= i < m and 0 <= j < m:
                    K[i, j] += (1.0 if a == b else -1.0) / h
                    M[i, j] += h * w / 4.0
    return float(eigh(K, M, eigvals_only=True)[0])


def five_point_first_eigenvalue(n):
    """Smallest eigenvalue of the 5-point Laplacian on the unit square (closed form)."""
    h = 1.0 / n
    return 2.0 * (4.0 / h ** 2) * math.sin(math.pi * h / 2.0) ** 2


def five_point_dense(n):
    """Same value from a dense matrix eigensolve (cross-check of the closed form)."""
    h = 1.0 / n
    m = n - 1
    T = (np.diag(np.full(m, 2.0)) - np.diag(np.ones(m - 1), 1) - np.diag(np.ones(m - 1), -1)) / h ** 2
    L = np.kron(T, np.eye(m)) + np.kron(np.eye(m), T)
    return float(np.linalg.eigvalsh(L)[0])


def frozen_energy_1d(u, n, p, q, tau, mu, r_hat, v, c0=1.0, delta=1.0, eps=1e-10):
    """Psi_v on (0,1), n cells, constant exponents; ``u``, ``v`` include boundary zeros."""
    h = 1.0 / n
    total = 0.0
    for e in range(n):
        g = (u[e + 1] - u[e]) / h
        s = g * g + eps * eps
        energy = (s ** (p / 2) - eps ** p) / p + (s ** (q / 2) - eps ** q) / q
        dv = abs((v[e + 1] - v[e]) / h)
        forcing = r_hat * dv ** (tau - 1.0)
        x = max(0.5 * (u[e] + u[e + 1]), 0.0)
        if x <= delta:
            F = c0 / mu * x ** mu
        else:
            F = c0 / mu * delta ** mu + c0 * delta ** (mu - 1.0) * (x - delta)
        total += h * (energy - forcing * x - F)
    return total


def _golden(f, a, b, tol=1e-15):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > max(tol, 8 * math.ulp(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def coordinate_descent_frozen(n, start, sweeps=5000, tol=1e-13, **data):
    """Minimise Psi_v one interior node at a time until no coordinate moves by more
    than ``tol`` or a full sweep no longer lowers the energy (roundoff floor).

    Each coordinate is minimised by golden section on a window around its
    current value; the window follows the size of the last move and is
    widened whenever the minimum lands on its edge.
    """
    u = list(start)
    width = [4.0 * max(max(u), 1e-3)] * (n + 1)
    energy = frozen_energy_1d(u, n, **data)
    for _ in range(sweeps):
        change = 0.0
        for i in range(1, n):

            def f(x, i=i):
                old = u[i]
                u[i] = x
                val = frozen_energy_1d(u, n, **data)
                u[i] = old
                return val

            while True:
                lo, hi = max(0.0, u[i] - width[i]), u[i] + width[i]
                x = _golden(f, lo, hi, tol=1e-3 * tol)
                edge = min(x - lo, hi - x)
                if edge > 0.02 * width[i] or (lo == 0.0 and x - lo <= edge):
                    break
                width[i] *= 4.0
            step = abs(x - u[i])
            width[i] = max(8.0 * step, 1e-11)
            change = max(change, step)
            u[i] = x
        new_energy = frozen_energy_1d(u, n, **data)
        if change < tol or new_energy >= energy:
            break
        energy = new_energy
    return np.array(u)
