"""Compare the compiled and numpy im2col/col2im kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Shapes match the default codec and stego layers.
"""

import argparse
import importlib
import timeit

import numpy as np

from semsteg.numerics import _im2col_py

CASES = [
    # (batch, channels, padded size, kernel, stride)
    (16, 1, 34, 3, 2),
    (16, 16, 18, 3, 2),
    (16, 32, 10, 3, 1),
    (64, 8, 10, 3, 1),
]


def out_size(hp, k, s):
    return (hp - k) // s + 1


def bench(mod, repeat):
    rows = []
    rng = np.random.default_rng(0)
    for n, c, hp, k, s in CASES:
        oh = out_size(hp, k, s)
        x = rng.standard_normal((n, c, hp, hp))
        cols = mod.im2col(x, k, s, oh, oh)
        t_fwd = min(timeit.repeat(lambda: mod.im2col(x, k, s, oh, oh), number=20, repeat=repeat)) / 20
        t_bwd = min(timeit.repeat(lambda: mod.col2im(cols, hp, hp, s), number=20, repeat=repeat)) / 20
        rows.append(((n, c, hp, k, s), t_fwd, t_bwd))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    try:
        compiled = importlib.import_module("semsteg.numerics._im2col")
    except ImportError:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")
        return
    py = bench(_im2col_py, args.repeat)
    cy = bench(compiled, args.repeat)
    print(f"{'case (n,c,hp,k,s)':<24}{'im2col py':>12}{'im2col cy':>12}{'col2im py':>12}{'col2im cy':>12}{'speedup':>9}")
    for (case, pf, pb), (_, cf, cb) in zip(py, cy):
        print(f"{str(case):<24}{pf*1e3:>10.3f}ms{cf*1e3:>10.3f}ms{pb*1e3:>10.3f}ms{cb*1e3:>10.3f}ms"
              f"{(pf + pb) / (cf + cb):>8.2f}x")


if __name__ == "__main__":
    main()
