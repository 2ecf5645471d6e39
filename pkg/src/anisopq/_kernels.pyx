# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled element kernels. Same contracts as ``_kernels_py``."""
import numpy as np

from libc.math cimport pow

cdef double S_FLOOR = 1e-30


def power_energy(const double[::1] u, const long[:, ::1] elements, const double[:, :, ::1] dphi,
                 const double[::1] wmeas, const double[::1] expo, double eps):
    cdef Py_ssize_t ne = elements.shape[0], nv = elements.shape[1], dim = dphi.shape[2]
    cdef Py_ssize_t e, k, d
    cdef double s, gd, p, total = 0.0, eps2 = eps * eps
    with nogil:
        for e in range(ne):
            s = eps2
            for d in range(dim):
                gd = 0.0
                for k in range(nv):
                    gd = gd + u[elements[e, k]] * dphi[e, k, d]
                s = s + gd * gd
            p = expo[e]
            if eps > 0:
                total = total + wmeas[e] * (pow(s, 0.5 * p) - pow(eps2, 0.5 * p)) / p
            else:
                total = total + wmeas[e] * pow(s, 0.5 * p) / p
    return total


def power_energy_grad(const double[::1] u, const long[:, ::1] elements, const double[:, :, ::1] dphi,
                      const double[::1] wmeas, const double[::1] expo, double eps):
    cdef Py_ssize_t ne = elements.shape[0], nv = elements.shape[1], dim = dphi.shape[2]
    cdef Py_ssize_t e, k, d
    cdef double s, p, coef, acc, total = 0.0, eps2 = eps * eps
    cdef double g[3]
    grad_arr = np.zeros(u.shape[0])
    cdef double[::1] grad = grad_arr
    with nogil:
        for e in range(ne):
            s = eps2
            for d in range(dim):
                g[d] = 0.0
                for k in range(nv):
                    g[d] = g[d] + u[elements[e, k]] * dphi[e, k, d]
                s = s + g[d] * g[d]
            p = expo[e]
            if eps > 0:
                total = total + wmeas[e] * (pow(s, 0.5 * p) - pow(eps2, 0.5 * p)) / p
            else:
                total = total + wmeas[e] * pow(s, 0.5 * p) / p
            if s > 0:
                coef = wmeas[e] * pow(s, 0.5 * p - 1.0)
                for k in range(nv):
                    acc = 0.0
                    for d in range(dim):
                        acc = acc + g[d] * dphi[e, k, d]
                    grad[elements[e, k]] += coef * acc
    return total, grad_arr


def power_hessian(const double[::1] u, const long[:, ::1] elements, const double[:, :, ::1] dphi,
                  const double[::1] wmeas, const double[::1] expo, double eps):
    cdef Py_ssize_t ne = elements.shape[0], nv = elements.shape[1], dim = dphi.shape[2]
    cdef Py_ssize_t e, k, l, d
    cdef double s, p, a, b, dd
    cdef double g[3]
    cdef double dg[4]
    out_arr = np.empty((ne, nv, nv))
    cdef double[:, :, ::1] out = out_arr
    with nogil:
        for e in range(ne):
            s = eps * eps
            for d in range(dim):
                g[d] = 0.0
                for k in range(nv):
                    g[d] = g[d] + u[elements[e, k]] * dphi[e, k, d]
                s = s + g[d] * g[d]
            if s < S_FLOOR:
                s = S_FLOOR
            p = expo[e]
            a = wmeas[e] * pow(s, 0.5 * p - 1.0)
            b = wmeas[e] * (p - 2.0) * pow(s, 0.5 * p - 2.0)
            for k in range(nv):
                dg[k] = 0.0
                for d in range(dim):
                    dg[k] = dg[k] + dphi[e, k, d] * g[d]
            for k in range(nv):
                for l in range(nv):
                    dd = 0.0
                    for d in range(dim):
                        dd = dd + dphi[e, k, d] * dphi[e, l, d]
                    out[e, k, l] = a * dd + b * dg[k] * dg[l]
    return out_arr


def bary_scatter(const double[::1] vals, const long[:, ::1] elements, Py_ssize_t n_nodes):
    cdef Py_ssize_t ne = elements.shape[0], nv = elements.shape[1]
    cdef Py_ssize_t e, k
    cdef double share
    out_arr = np.zeros(n_nodes)
    cdef double[::1] out = out_arr
    with nogil:
        for e in range(ne):
            share = vals[e] / nv
            for k in range(nv):
                out[elements[e, k]] += share
    return out_arr
