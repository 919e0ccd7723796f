"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--quick]

Numba compile time is excluded: every kernel runs once before timing.
"""
import argparse
import time

import numpy as np

from rdsim.kernels import INTEGRATORS, numba_impl, numpy_impl


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(quick):
    n_rng = 200_000 if quick else 2_000_000
    n_traj = 200 if quick else 2000
    sizes = (16, 32) if quick else (16, 32, 64)
    keys_idx = np.arange(n_rng, dtype=np.uint64)
    v = 2.0 + np.random.default_rng(0).normal(0, 0.5, n_traj)
    out = []
    out.append((f"rng keys+normal n={n_rng}",
                lambda k: k.first_normal_per_key(k.stream_keys(np.uint64(42), keys_idx))))
    for name in ("leapfrog", "yoshida4"):
        code = INTEGRATORS[name]
        out.append((f"classify_batch {name} n={n_traj}",
                    lambda k, code=code: k.classify_batch(0.0, v, 1e-3, 100.0, code)))
    for n in sizes:
        rng = np.random.default_rng(n)
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = (x + x.conj().T) / 2
        out.append((f"jacobi_eigh n={n}", lambda k, h=h: k.jacobi_eigh(h.copy(), 1e-15, 100)))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args(argv)
    if numba_impl is None:
        raise SystemExit("numba backend unavailable (is RDSIM_NO_NUMBA set?)")
    print(f"{'kernel':<34}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for label, fn in cases(args.quick):
        fn(numba_impl)          # compile / warm cache
        t_nb = best_of(lambda: fn(numba_impl), args.repeat)
        t_np = best_of(lambda: fn(numpy_impl), args.repeat)
        print(f"{label:<34}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
