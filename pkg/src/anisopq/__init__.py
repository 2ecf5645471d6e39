"""Anisotropic (p,q)-Laplacian solvers."""
