"""Benchmark: compiled coefficient kernels against the numpy reference.

Times the four kernels in isolation at several orders, then two
representative end-to-end solves, once per available backend, and prints
the speedup of the compiled code.  Run from the repository root:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from parman import _kernels
from parman._kernels import available_backends, set_backend
from parman.models import FrenkelKontorova, McMillan
from parman.solver import SolveConfig, select_eigensolution, solve


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases():
    rng = np.random.default_rng(1905)
    cases = []
    for order in (64, 256, 1024):
        a = rng.uniform(-0.5, 0.5, size=order + 1)
        b = rng.uniform(-0.5, 0.5, size=order + 1)
        r = a.copy()
        r[0] = 1.0  # reciprocal needs a nonzero constant term
        s0, c0 = float(np.sin(a[0])), float(np.cos(a[0]))
        cases.append(
            (f"cauchy_product   n={order:5d}",
             lambda a=a, b=b: _kernels.cauchy_product(a, b))
        )
        cases.append(
            (f"sin_cos_coeffs   n={order:5d}",
             lambda a=a, s0=s0, c0=c0: _kernels.sin_cos_coeffs(a, s0, c0))
        )
        cases.append(
            (f"reciprocal       n={order:5d}",
             lambda r=r: _kernels.reciprocal_coeffs(r))
        )

        def stepped(a=a, s0=s0, c0=c0, order=order):
            S = np.array([s0])
            C = np.array([c0])
            for k in range(order):
                s_top, c_top = _kernels.sin_cos_step(a[: k + 2], S, C)
                S = np.append(S, s_top)
                C = np.append(C, c_top)

        cases.append((f"sin_cos_step x n n={order:5d}", stepped))
    return cases


def solve_cases():
    fk = FrenkelKontorova(gammas=(1.0, 0.1, 0.0), delta=0.4, C=(1.0,))
    mc = McMillan(eta=1.0)
    return (
        (
            "solve fk order=100 (trig engine)",
            lambda: solve(
                fk, select_eigensolution(fk), SolveConfig(order=100, scale=10.0)
            ),
        ),
        (
            "solve mcmillan order=150 (generic engine)",
            lambda: solve(
                mc, select_eigensolution(mc), SolveConfig(order=150, scale=1.0)
            ),
        ),
    )


def main():
    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "c" not in backends:
        print("compiled backend not built; timing the reference only")

    rows = []
    for label, fn in (*kernel_cases(), *solve_cases()):
        repeats = 3 if label.startswith("solve") else 20
        timings = {}
        for backend in backends:
            set_backend(backend)
            fn()  # warm up
            timings[backend] = best_of(fn, repeats)
        rows.append((label, timings))
    set_backend("c" if "c" in backends else "python")

    width = max(len(label) for label, _ in rows)
    header = f"{'case':<{width}}  " + "".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for label, timings in rows:
        line = f"{label:<{width}}  " + "".join(
            f"{timings[b] * 1e3:>10.3f}ms" for b in backends
        )
        if len(backends) > 1:
            line += f"{timings['python'] / timings['c']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
