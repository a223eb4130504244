#!/usr/bin/env python3
"""Timing comparison: compiled hot kernels against the numpy reference.

The in-process section times the raw kernels on batches of points. The
end-to-end section runs one identical operator evaluation in a subprocess
per backend (backend selection happens at import time, so it needs a fresh
interpreter) and reports wall-clock.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fraclab._kernels import _ref

try:
    from fraclab._kernels import _fast
except ImportError:
    _fast = None


def _time(fn, repeats: int) -> float:
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeats, number)) / number


def bench_kernels(sizes, repeats: int) -> None:
    rng = np.random.default_rng(0)
    a = np.array([0.0, 0.0, -0.5])
    b = np.array([0.0, 0.0, 0.5])
    cloud = rng.normal(size=(64, 3))

    print(f"{'kernel':<18}{'batch':>9}{'ref ms':>12}{'fast ms':>12}{'speedup':>10}")
    for m in sizes:
        pts = np.ascontiguousarray(rng.normal(size=(m, 3)))
        ts = np.ascontiguousarray(np.abs(rng.normal(size=m)) * 3.0)
        jobs = [
            ("ramp01", lambda impl: impl.ramp01(ts)),
            ("dist_segment", lambda impl: impl.dist_segment(pts, a, b)),
            ("dist_circle3d", lambda impl: impl.dist_circle3d(pts, 1.0)),
            ("dist_point_cloud", lambda impl: impl.dist_point_cloud(pts, cloud)),
        ]
        for name, job in jobs:
            t_ref = _time(lambda: job(_ref), repeats)
            if _fast is None:
                print(f"{name:<18}{m:>9}{t_ref * 1e3:>12.4f}{'n/a':>12}{'n/a':>10}")
                continue
            t_fast = _time(lambda: job(_fast), repeats)
            print(
                f"{name:<18}{m:>9}{t_ref * 1e3:>12.4f}{t_fast * 1e3:>12.4f}"
                f"{t_ref / t_fast:>10.2f}"
            )


_END_TO_END = """
import time
import numpy as np
from fraclab import FinitePoints, frac_laplacian_radial, frac_order, tube_cutoff
from fraclab._kernels import backend_name

field = tube_cutoff(FinitePoints([[0.0]]), 2.0**-4)
order = frac_order(1, 0.5)
t0 = time.perf_counter()
for r in np.linspace(0.0, 0.5, 40):
    frac_laplacian_radial(field, order, float(r))
print(f"{backend_name}: {time.perf_counter() - t0:.3f} s for 40 cutoff evaluations")
"""


def bench_end_to_end() -> None:
    for force in ("0", "1"):
        env = dict(os.environ, FRACLAB_FORCE_REF=force)
        out = subprocess.run(
            [sys.executable, "-c", _END_TO_END], env=env, capture_output=True, text=True
        )
        sys.stdout.write(out.stdout)
        if out.returncode != 0:
            sys.stderr.write(out.stderr)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[1_000, 100_000])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args()

    if _fast is None:
        print("compiled backend not importable; timing the reference only", file=sys.stderr)
    bench_kernels(args.sizes, args.repeats)
    if not args.skip_end_to_end:
        print()
        bench_end_to_end()


if __name__ == "__main__":
    main()
