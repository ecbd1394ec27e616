"""Timing comparison of the accelerated and plain hot-loop backends.

Runs three representative workloads against whichever backend the
current process selected (see drkernels.backend):

* monomial-sum evaluation on a large radius array (even-k kernel path)
* spherical ODE solves across an s sweep (transform inner loop)
* an odd-k kernel grid (tail quadrature calling the sum per cell)

With --both the script re-executes itself in a subprocess with
DRKERNELS_DISABLE_NUMBA=1 and prints the two columns side by side.

Usage:
    python benchmarks/bench_backends.py
    python benchmarks/bench_backends.py --both
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from drkernels import backend, symbolic
from drkernels.geometry import space_params
from drkernels.kernels import kernel_grid
from drkernels.spherical import phi

QUAT = space_params(4, 3)
HEIS = space_params(2, 1)


def _best_of(fn, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_eval_sum():
    chain = symbolic.inverse_abel_chain(4, 3)
    r = np.linspace(0.5, 30.0, 200_000)
    tau = 0.8 + 0.4j
    symbolic.evaluate(chain, r[:64], tau)   # warm the jit cache
    return _best_of(lambda: symbolic.evaluate(chain, r, tau))


def bench_phi_ode():
    r = np.linspace(1e-3, 40.0, 512)
    phi(HEIS, 0.123, r)                     # warm the jit cache
    batches = [np.linspace(0.2, 7.8, 12) + 0.001 * i for i in range(1, 6)]

    def run():
        s_list = batches.pop()
        for s in s_list:
            phi(HEIS, float(s), r)

    return _best_of(run, repeat=len(batches))


def bench_odd_kernel():
    r = np.linspace(0.5, 10.0, 32)
    kernel_grid(QUAT, 1.0 + 0.5j, r[:2])    # warm the jit cache
    return _best_of(lambda: kernel_grid(QUAT, 1.0 + 0.5j, r), repeat=3)


BENCHES = [
    ("eval_sum 200k radii", bench_eval_sum),
    ("phi ODE sweep x12", bench_phi_ode),
    ("odd-k kernel grid 32", bench_odd_kernel),
]


def run_all():
    return {name: fn() for name, fn in BENCHES}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--both", action="store_true",
                    help="also time the pure-numpy backend in a subprocess")
    ap.add_argument("--json", action="store_true",
                    help="emit machine-readable results only")
    args = ap.parse_args(argv)

    results = run_all()
    if args.json:
        print(json.dumps({"backend": backend.backend_name(), **results}))
        return 0

    print(f"backend: {backend.backend_name()}")
    for name, sec in results.items():
        print(f"  {name:<24s} {sec * 1e3:9.2f} ms")

    if args.both:
        env = dict(os.environ, DRKERNELS_DISABLE_NUMBA="1")
        out = subprocess.run([sys.executable, __file__, "--json"], env=env,
                             capture_output=True, text=True, check=True)
        plain = json.loads(out.stdout)
        print(f"backend: {plain.pop('backend')}")
        for name, sec in plain.items():
            ratio = sec / results[name]
            print(f"  {name:<24s} {sec * 1e3:9.2f} ms   "
                  f"({ratio:.1f}x the {backend.backend_name()} time)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
