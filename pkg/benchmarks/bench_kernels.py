"""Compare the compiled and pure-Python kernels.

Usage: python benchmarks/bench_kernels.py [--n 3] [--sweeps 20000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from cayley_ising import kernels
from cayley_ising.configurations import BoundarySpec
from cayley_ising.gibbs import GibbsSpec, _kernel_inputs, mcmc_sample
from cayley_ising.model import Couplings


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=3, help="enumeration volume radius")
    ap.add_argument("--chunk", type=int, default=2**18, help="configurations per timing")
    ap.add_argument("--sweeps", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = ["python"] + (["cython"] if kernels.compiled_backend is not None else [])
    nfree, base, balls, parity = _kernel_inputs(2, args.n, BoundarySpec.plus(), args.n + 1)
    stop = min(2**nfree, args.chunk)
    spec = GibbsSpec(2, 2, Couplings(-1, 0, -1), 1.0)

    print(f"default backend: {kernels.BACKEND}")
    print(f"{'kernel':<28}{'backend':<10}{'seconds':>10}{'rate':>16}")
    results = {}
    for name in backends:
        kern = kernels.get_backend(name)
        t, forms = best_of(lambda: kern.ball_forms(0, stop, base, nfree, balls, parity),
                           args.repeat)
        results[name] = np.asarray(forms)
        print(f"{'ball_forms (n=%d, %d cfg)' % (args.n, stop):<28}{name:<10}{t:>10.4f}"
              f"{stop / t:>13.3g}/s")
    for name in backends:
        t, _ = best_of(lambda: mcmc_sample(spec, args.sweeps, seed=1, backend=name), args.repeat)
        print(f"{'metropolis (n=2, %d sw)' % args.sweeps:<28}{name:<10}{t:>10.4f}"
              f"{args.sweeps / t:>13.3g}/s")
    if len(results) == 2:
        same = np.array_equal(results["python"], results["cython"])
        print(f"ball_forms outputs identical across backends: {same}")


if __name__ == "__main__":
    main()
