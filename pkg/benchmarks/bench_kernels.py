"""Compiled kernels versus the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-N wall time per call for each kernel and backend, and
checks that both backends return identical arrays.
"""

import argparse
import timeit

import numpy as np

from cubecert import _backend


def cases(rng):
    pts3 = rng.random((200_000, 3))
    nodes3 = rng.random((64, 3))
    pts8 = rng.random((20_000, 8))
    nodes8 = rng.random((512, 8))
    g_nodes = np.sort(rng.random(10))
    g_weights = np.full(10, 0.1)
    return {
        "min_l1_dist d=3 n=64 k=2e5": lambda k: k.min_l1_dist(pts3, nodes3, False),
        "min_l1_dist periodic d=8 n=512 k=2e4": lambda k: k.min_l1_dist(pts8, nodes8, True),
        "hat_values d=3 n=64 k=2e5": lambda k: k.hat_values(pts3, nodes3, 0.05, False),
        "grid_chunk d=6 m=10 count=2^16": lambda k: k.grid_chunk(g_nodes, g_weights, 6, 12345, 1 << 16),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    backends = {"python": _backend.python_kernels}
    if _backend.compiled_kernels is not None:
        backends["cython"] = _backend.compiled_kernels
    else:
        print("compiled extension not available; timing the numpy fallback only")

    print(f"{'kernel':42s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases(np.random.default_rng(0)).items():
        times, outputs = {}, {}
        for b, k in backends.items():
            outputs[b] = fn(k)
            times[b] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
        line = f"{name:42s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
        if len(backends) > 1:
            a, c = outputs["python"], outputs["cython"]
            same = all(np.array_equal(x, y) for x, y in zip(a, c)) if isinstance(a, tuple) else np.array_equal(a, c)
            line += f"  {times['python'] / times['cython']:8.1f}x" + ("" if same else "  MISMATCH")
        print(line)


if __name__ == "__main__":
    main()
