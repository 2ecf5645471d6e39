"""Pure numpy element kernels (fallback for the compiled ``_kernels``).

All kernels act on the regularised power density

    W_e(g) = w_e * ((|g|^2 + eps^2)^(p_e/2) - (eps^2)^(p_e/2)) / p_e

where g is the P1 gradient on element e and w_e a per-element weight
(usually the element measure).
"""
import numpy as np

_S_FLOOR = 1e-30


def _grads(u, elements, dphi):
    return np.einsum("ek,ekd->ed", u[elements], dphi)


def power_energy(u, elements, dphi, wmeas, expo, eps):
    g = _grads(u, elements, dphi)
    s = np.einsum("ed,ed->e", g, g) + eps * eps
    off = (eps * eps) ** (0.5 * expo) if eps > 0 else 0.0
    return float(np.sum(wmeas * (s ** (0.5 * expo) - off) / expo))


def power_energy_grad(u, elements, dphi, wmeas, expo, eps):
    g = _grads(u, elements, dphi)
    s = np.einsum("ed,ed->e", g, g) + eps * eps
    off = (eps * eps) ** (0.5 * expo) if eps > 0 else 0.0
    energy = float(np.sum(wmeas * (s ** (0.5 * expo) - off) / expo))
    coef = np.zeros_like(s)
    nz = s > 0
    coef[nz] = wmeas[nz] * s[nz] ** (0.5 * expo[nz] - 1.0)
    contrib = np.einsum("ed,ekd->ek", coef[:, None] * g, dphi)
    grad = np.bincount(elements.ravel(), contrib.ravel(), minlength=u.shape[0])
    return energy, grad


def power_hessian(u, elements, dphi, wmeas, expo, eps):
    """Local Hessian blocks, shape (n_elements, nv, nv)."""
    g = _grads(u, elements, dphi)
    s = np.maximum(np.einsum("ed,ed->e", g, g) + eps * eps, _S_FLOOR)
    a = wmeas * s ** (0.5 * expo - 1.0)
    b = wmeas * (expo - 2.0) * s ** (0.5 * expo - 2.0)
    dg = np.einsum("ekd,ed->ek", dphi, g)
    return a[:, None, None] * np.einsum("ekd,eld->ekl", dphi, dphi) + b[:, None, None] * dg[:, :, None] * dg[:, None, :]


def bary_scatter(vals, elements, n_nodes):
    """Distribute per-element values evenly onto the element's vertices."""
    nv = elements.shape[1]
    return np.bincount(elements.ravel(), np.repeat(vals / nv, nv), minlength=n_nodes)
