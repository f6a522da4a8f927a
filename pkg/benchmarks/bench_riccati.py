"""Time the compiled and pure-Python Riccati integrators on the same problems.

Usage: python3 benchmarks/bench_riccati.py [--repeat N] [--tol TOL]
"""

import argparse
import time

import numpy as np

from shearwave import _kernels
from shearwave.profiles import ShearProfile
from shearwave.riccati import chebyshev_nodes

PROFILES = {
    "uniform": ShearProfile.constant(1.0, 1.0),
    "affine": ShearProfile.poly([2.0, 1.0], 1.0),
    "cubic": ShearProfile.poly([1.5, 0.3, -0.2, 0.1], 1.0),
}
KSQ = [0.25, 1.0, 25.0, 2500.0]


def run(mod, tol, repeat):
    """Best-of-``repeat`` wall time per profile; also returns the solutions."""
    times, sols = {}, {}
    for name, prof in PROFILES.items():
        breaks, cU, cdU = prof.ppoly()
        nodes = chebyshev_nodes(prof.depth, 65)
        best = np.inf
        for _ in range(repeat):
            t = time.perf_counter()
            out = [mod.integrate(breaks, cU, cdU, ksq, nodes, tol, tol * 1e-3, 2_000_000) for ksq in KSQ]
            best = min(best, time.perf_counter() - t)
        times[name] = best
        sols[name] = [o[0] for o in out]
    return times, sols


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args(argv)

    backends = _kernels.backends()
    results = {name: run(mod, args.tol, args.repeat) for name, mod in backends.items()}
    print(f"{'profile':<10}" + "".join(f"{b:>14}" for b in results) + ("      speedup" if len(results) > 1 else ""))
    for prof in PROFILES:
        row = f"{prof:<10}" + "".join(f"{results[b][0][prof] * 1e3:>11.2f} ms" for b in results)
        if "compiled" in results:
            row += f"{results['python'][0][prof] / results['compiled'][0][prof]:>12.1f}x"
        print(row)
    if "compiled" in results:
        diff = max(np.abs(a - b).max() for prof in PROFILES
                   for a, b in zip(results["python"][1][prof], results["compiled"][1][prof]))
        print(f"max |q_python - q_compiled| = {diff:.1e}")
    else:
        print("compiled extension not built; only the Python backend was timed")


if __name__ == "__main__":
    main()
