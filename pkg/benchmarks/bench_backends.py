"""Compare the compiled jet kernel against the numpy fallback.

Times the raw truncated-convolution kernels on representative shapes and
the full Einstein certification on one scenario per structure.  Run from
the repository root:

    python benchmarks/bench_backends.py
"""

import os
import time

import numpy as np


def _time(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(backend):
    os.environ["PARAKAHLER_JET_BACKEND"] = backend
    from parakahler.jets import jet_space

    rows = []
    rng = np.random.default_rng(0)
    for dim, order, batch in ((4, 3, 64), (8, 2, 64), (8, 1, 512), (16, 3, 16)):
        sp = jet_space(dim, order)
        a = rng.normal(size=(batch, sp.ncoeff))
        b = rng.normal(size=(batch, sp.ncoeff))
        dt = _time(lambda: sp.mul(a, b))
        rows.append((f"mul dim={dim} order={order} batch={batch}", dt))
    sp = jet_space(8, 1)
    am = rng.normal(size=(8, 8, sp.ncoeff))
    bm = rng.normal(size=(8, 64, sp.ncoeff))
    rows.append(("matmul 8x8 @ 8x64 (dim=8, order=1)", _time(lambda: sp.matmul(am, bm))))
    return rows


def bench_einstein(backend):
    os.environ["PARAKAHLER_JET_BACKEND"] = backend
    from parakahler.scenarios import generate_scenario, resolve, sample_points
    from parakahler.verify import einstein_residual

    rows = []
    for kind, n, m in (("projective", 3, 1), ("conformal", 4, 1), ("grassmannian", 2, 2)):
        sc = generate_scenario(1, kind, n=n, m=m, degree=2, points=20)
        spec, conn = resolve(sc)
        pts = sample_points(sc)
        dt = _time(lambda: einstein_residual(spec, conn, pts), repeat=3)
        rows.append((f"einstein {sc.id} (20 pts)", dt))
    return rows


def main():
    from parakahler.jets import available_backends

    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernel not built; run `python setup.py build_ext --inplace`")
    results = {}
    for backend in backends:
        results[backend] = bench_kernels(backend) + bench_einstein(backend)
    names = [name for name, _ in results[backends[0]]]
    width = max(len(n) for n in names) + 2
    header = f"{'benchmark':<{width}}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for i, name in enumerate(names):
        line = f"{name:<{width}}"
        times = [results[b][i][1] for b in backends]
        for t in times:
            line += f"{t * 1e3:>10.2f}ms"
        if len(times) > 1:
            line += f"{times[0] / times[1]:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
