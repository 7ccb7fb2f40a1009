#!/usr/bin/env python
"""Compare the compiled and pure-Python search kernels on the extremal
triangle family.

Both backends must explore exactly the same tree (identical node counts);
only wall time may differ.  Run from an installed environment:

    python benchmarks/compare_backends.py --max-n 7
"""
from __future__ import annotations

import argparse
import time

from rainbowmg import kernel
from rainbowmg.generators import gen_triangle_extremal
from rainbowmg.solvers import SolverBudget


def run(n: int, backend: str):
    inst = gen_triangle_extremal(n)
    packed = inst.packed()
    t0 = time.perf_counter()
    status, nodes, best, _ = kernel.run_search(
        packed.estart, packed.pa, packed.pb, inst.n, inst.vertex_count,
        backend=backend,
    )
    return time.perf_counter() - t0, nodes, best


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-n", type=int, default=7)
    args = ap.parse_args()
    backends = ["python"]
    if kernel.BACKEND == "cython":
        backends.insert(0, "cython")
    else:
        print("note: compiled kernel unavailable, timing python only")
    print(f"{'n':>3} " + "".join(f"{b + ' (s)':>14}" for b in backends)
          + f"{'nodes':>14}{'best':>6}")
    for n in range(2, args.max_n + 1):
        times = []
        ref = None
        for b in backends:
            dt, nodes, best = run(n, b)
            times.append(dt)
            if ref is None:
                ref = (nodes, best)
            elif ref != (nodes, best):
                raise SystemExit(
                    f"backend mismatch at n={n}: {ref} vs {(nodes, best)}")
        print(f"{n:>3} " + "".join(f"{t:>14.4f}" for t in times)
              + f"{ref[0]:>14}{ref[1]:>6}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
