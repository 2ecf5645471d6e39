"""Kernel backend selection.

The compiled extension is used when it imports; set ``ANISOPQ_PURE_PYTHON=1``
to force the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("ANISOPQ_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "cython"

power_energy = _impl.power_energy
power_energy_grad = _impl.power_energy_grad
power_hessian = _impl.power_hessian
bary_scatter = _impl.bary_scatter
