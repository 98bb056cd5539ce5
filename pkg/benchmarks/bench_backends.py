"""Timing comparison of the compiled bulk kernels against the pure
Python fallbacks.

Run from the repository root:

    python benchmarks/bench_backends.py [--points N] [--m M]

Each bulk entry point is timed on the same inputs through both
implementations and cross-checked for equal outputs, so the benchmark
doubles as a parity test on realistic sizes.
"""

from __future__ import annotations

import argparse
import math
import time
from fractions import Fraction

import numpy as np

from adaptrec import _pykernel as pure
from adaptrec import backend
from adaptrec.num import scale_all
from adaptrec.partition import PartitionSpec

try:
    from adaptrec import _core as compiled
except ImportError:
    compiled = None


def _time(fn, *args, repeats: int = 3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _row(name: str, t_pure: float, t_comp: float | None) -> None:
    if t_comp is None:
        print(f"{name:<24} pure {t_pure * 1e3:9.2f} ms   compiled      n/a")
    else:
        print(f"{name:<24} pure {t_pure * 1e3:9.2f} ms   "
              f"compiled {t_comp * 1e3:9.2f} ms   x{t_pure / t_comp:6.1f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=20_000)
    ap.add_argument("--m", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    m, n = args.m, args.points
    spec = PartitionSpec.create(m, eps=Fraction(1, 10))
    fspec = PartitionSpec.create(m, eps=Fraction(1, 10), mode="float64")
    rng = np.random.default_rng(args.seed)

    print(f"backend selected at import: {backend.BACKEND}")
    print(f"{n} points, m={m}\n")

    ys = [tuple(Fraction(int(v), 100) for v in rng.integers(-1500, 1500,
                                                            size=m))
          for _ in range(n)]
    M = 100 * 2 * (m + 2)
    Q = np.array([scale_all(row, M) for row in ys], dtype=np.int64)
    t = scale_all(spec.delta, M)

    Yf = rng.uniform(-15.0, 15.0, size=(n, m))

    cases = [
        ("bulk_level_dists", (Q, t, M)),
        ("bulk_recover_exact", (Q, t, M)),
        ("bulk_level_dists_f", (Yf, fspec.delta_f)),
        ("bulk_recover_f", (Yf, fspec.delta_f, fspec.zero_tol)),
        ("bulk_lambda_star_f", (Yf, fspec.delta_f, 1, fspec.c_f,
                                float(math.comb(m, m - 1)))),
    ]
    for name, call_args in cases:
        t_pure, out_pure = _time(getattr(pure, name), *call_args)
        if compiled is not None and hasattr(compiled, name):
            t_comp, out_comp = _time(getattr(compiled, name), *call_args)
            a = out_pure if isinstance(out_pure, tuple) else (out_pure,)
            b = out_comp if isinstance(out_comp, tuple) else (out_comp,)
            for x, y in zip(a, b):
                if x.dtype.kind == "f":
                    assert np.allclose(x, y, atol=1e-12), name
                else:
                    assert np.array_equal(x, y), name
        else:
            t_comp = None
        _row(name, t_pure, t_comp)


if __name__ == "__main__":
    main()
