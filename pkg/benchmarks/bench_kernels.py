#!/usr/bin/env python3
"""Compiled vs pure-Python kernels on synthetic layered Horn programs.

    python benchmarks/bench_kernels.py [--sizes 10000 100000] [--repeat 3]

Times ``pack_horn``, ``horn_fixpoint`` and a full ``tp_fix`` run for each
backend and prints the speedup of the compiled one.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from helpers import layered_program  # noqa: E402

from llmlogic import kernels  # noqa: E402
from llmlogic.matrix import THRESHOLD, encode  # noqa: E402


def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def tp_fix_with(k, m):
    v, w = m.v0.copy(), np.empty_like(m.v0)
    while k.csr_tp_step(m.indptr, m.indices, m.data, v, w, THRESHOLD):
        v, w = w, v
    return w


def run(sizes, repeat, matrix_limit):
    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled kernels not built; only the fallback is timed")
    rows = []
    for n in sizes:
        p = layered_program(n, width=min(1000, max(10, n // 20)))
        clauses = list(p.clauses)
        m = encode(p) if n <= matrix_limit else None
        for name in backends:
            k = kernels.get_backend(name)
            heads, ptr, idx = k.pack_horn(clauses)
            t_pack = best(lambda: k.pack_horn(clauses), repeat)
            t_fix = best(lambda: k.horn_fixpoint(heads, ptr, idx, len(p.symbols)), repeat)
            t_tp = best(lambda: tp_fix_with(k, m), repeat) if m is not None else float("nan")
            rows.append((n, name, t_pack, t_fix, t_tp))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10_000, 100_000, 1_000_000])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--matrix-limit", type=int, default=100_000,
                    help="skip tp_fix above this many clauses")
    args = ap.parse_args(argv)

    rows = run(args.sizes, args.repeat, args.matrix_limit)
    print(f"{'clauses':>10} {'backend':>9} {'pack_horn':>11} {'fixpoint':>11} {'tp_fix':>11}")
    for n, name, *ts in rows:
        cells = " ".join(f"{t * 1e3:>9.2f}ms" if t == t else f"{'-':>11}" for t in ts)
        print(f"{n:>10,} {name:>9} {cells}")
    by = {(n, name): r for n, name, *r in rows}
    print()
    for n in args.sizes:
        if (n, "compiled") in by:
            c, py = by[(n, "compiled")], by[(n, "python")]
            ratio = " ".join(f"{x / y:6.1f}x" if x == x else f"{'-':>7}" for x, y in zip(py, c))
            print(f"{n:>10,} speedup pack/fixpoint/tp_fix: {ratio}")


if __name__ == "__main__":
    main()
