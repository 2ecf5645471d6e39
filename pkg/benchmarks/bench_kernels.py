"""Time the compiled element kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --n 256 --repeat 20
"""
import argparse
import timeit

import numpy as np

from anisopq import _kernels_py
from anisopq.mesh import build_mesh

try:
    from anisopq import _kernels as _kernels_ext
except ImportError:  # extension not built
    _kernels_ext = None


def _case(n, seed):
    mesh = build_mesh(2, [1.0, 1.0], [n, n])
    rng = np.random.default_rng(seed)
    u = rng.random(mesh.n_nodes)
    expo = np.ascontiguousarray(2.0 + 0.5 * mesh.barycenters[:, 0])
    args = (u, mesh.elements, mesh.dphi, np.ascontiguousarray(mesh.measures), expo, 1e-10)
    return mesh, args


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=256, help="cells per axis of the 2D mesh")
    ap.add_argument("--repeat", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    opts = ap.parse_args(argv)

    mesh, args = _case(opts.n, opts.seed)
    backends = {"numpy": _kernels_py}
    if _kernels_ext is not None:
        backends["cython"] = _kernels_ext
    print(f"mesh {opts.n}x{opts.n}: {mesh.n_nodes} nodes, {mesh.n_elements} triangles")
    print(f"{'kernel':<20}" + "".join(f"{b:>14}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name in ("power_energy", "power_energy_grad", "power_hessian"):
        times = {}
        for b, mod in backends.items():
            fn = getattr(mod, name)
            fn(*args)
            times[b] = min(timeit.repeat(lambda: fn(*args), number=1, repeat=opts.repeat))
        row = f"{name:<20}" + "".join(f"{1e3 * t:>12.2f}ms" for t in times.values())
        if len(times) > 1:
            row += f"{times['numpy'] / times['cython']:>11.1f}x"
        print(row)
    if len(backends) > 1:
        e0, g0 = _kernels_py.power_energy_grad(*args)
        e1, g1 = _kernels_ext.power_energy_grad(*args)
        print(f"max |grad difference| = {np.abs(g0 - g1).max():.2e}, energy difference = {abs(e0 - e1):.2e}")


if __name__ == "__main__":
    main()
