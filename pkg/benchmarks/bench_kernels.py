"""
Compare the numba path loop with the vectorized numpy fallback.

    python3 benchmarks/bench_kernels.py --paths 1000000 --repeat 3

Both kernels value the same uniforms, so the script also reports the largest
difference between their outputs.
"""
import argparse
import time

import numpy as np

from ftdcopula import _jit
from ftdcopula.engine import SimulationConfig, run_simulation, substream_uniforms
from ftdcopula.kernels import value_paths
from ftdcopula.numerics import CorrelationMatrix, cholesky
from ftdcopula.pricing import BasketSpec, DiscountCurve, default_schedule
from ftdcopula.survival import CreditName


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--paths", type=int, default=1_000_000)
    ap.add_argument("--names", type=int, default=5)
    ap.add_argument("--rho", type=float, default=0.1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    n = args.names
    basket = BasketSpec(tuple(CreditName(f"N{i}", 0.2, 0.2) for i in range(n)), 5.0, default_schedule(5.0, 0.5))
    sigma = CorrelationMatrix.uniform(n, args.rho)
    curve = DiscountCurve(0.05)
    pay = basket.schedule.as_array()
    kernel_args = (cholesky(sigma).L, basket.hazards, basket.recoveries, pay, curve.df(pay), basket.maturity, curve.rate)

    u = substream_uniforms(1200, 0, args.paths, n)
    backends = ["numba", "numpy"] if _jit.USE_NUMBA else ["numpy"]
    if _jit.USE_NUMBA:
        value_paths(u[:10], *kernel_args, backend="numba")  # compile outside the timing

    print(f"{args.paths} paths, {n} names, rho={args.rho}, best of {args.repeat}")
    print(f"{'backend':<8} {'kernel s':>10} {'Mpaths/s':>10} {'end-to-end s':>14}")
    outputs = {}
    for b in backends:
        t_kernel, outputs[b] = best_of(lambda: value_paths(u, *kernel_args, backend=b), args.repeat)
        cfg = SimulationConfig(args.paths, 1200, backend=b)
        t_run, _ = best_of(lambda: run_simulation(basket, sigma, curve, cfg), args.repeat)
        print(f"{b:<8} {t_kernel:>10.3f} {args.paths / t_kernel / 1e6:>10.2f} {t_run:>14.3f}")

    if len(outputs) == 2:
        diffs = [np.max(np.abs(a - b)) for a, b in zip(outputs["numba"], outputs["numpy"])]
        print(f"max |numba - numpy| over outputs: {max(diffs):.2e}")
    else:
        print(f"numba disabled ({_jit.ENV_FLAG} set or numba missing); numpy only")


if __name__ == "__main__":
    main()
