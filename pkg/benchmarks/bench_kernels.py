"""Time each kernel on both backends.

Run with ``python3 benchmarks/bench_kernels.py [--paths N] [--steps N] [--repeat N]``.
"""
import argparse
import timeit

import numpy as np

from convarb import kernels


def _inputs(n_paths: int, n_steps: int):
    rng = np.random.default_rng(0)
    dt = np.full(n_steps, 1.0 / n_steps)
    dW = rng.standard_normal((n_paths, n_steps)) * np.sqrt(dt)
    x = np.cumsum(rng.standard_normal((n_paths, n_steps)) * np.sqrt(dt), axis=1)
    jumps = np.where(rng.random((n_paths, n_steps)) < 0.01, -0.5, 0.0)
    gain = np.tanh(np.linspace(0.0, 1.0, n_steps))
    return {
        "ou_euler": lambda impl: kernels.ou_euler(np.zeros(n_paths), 0.5, dt, dW, impl=impl),
        "kalman_bucy": lambda impl: kernels.kalman_bucy(x, dW, gain, dt, 0.0, impl=impl),
        "absorb_scan": lambda impl: kernels.absorb_scan(np.ones(n_paths), np.ones(n_paths), dW, -dW, impl=impl),
        "doleans": lambda impl: kernels.doleans(dW, np.broadcast_to(dt, dW.shape), jumps, impl=impl),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--paths", type=int, default=2000)
    parser.add_argument("--steps", type=int, default=1000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    impls = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    print(f"{args.paths} paths x {args.steps} steps, best of {args.repeat}")
    print(f"{'kernel':<12}" + "".join(f"{i:>12}" for i in impls) + ("     speedup" if len(impls) == 2 else ""))
    for name, fn in _inputs(args.paths, args.steps).items():
        best = [min(timeit.repeat(lambda: fn(i), number=1, repeat=args.repeat)) for i in impls]
        row = f"{name:<12}" + "".join(f"{b * 1e3:>10.1f}ms" for b in best)
        if len(best) == 2:
            row += f"{best[0] / best[1]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
