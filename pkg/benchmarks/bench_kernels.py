#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-python fallback.

Runs the three hot kernels at a representative grid size and one full
pipeline evaluation per backend:

    python3 benchmarks/bench_kernels.py [--nodes N] [--repeats R]

The kernel rows reuse the CLI's `bench` subcommand; the pipeline row spawns
subprocesses so each backend is selected at import time.
"""

import argparse
import subprocess
import sys
import time

from fp_qsdc import cli

_PIPELINE_SNIPPET = """
import math, time
import fp_qsdc
from fp_qsdc import SystemParams, SourceParams, evaluate_point
from fp_qsdc.security import QUAD_FAST
src = SourceParams(intensity_max=0.0895, delta_x=0.0490*math.pi,
                   delta_z=0.0546*math.pi)
system = SystemParams()
evaluate_point(system, src, 2.0, spec=QUAD_FAST)  # warm caches
best = float('inf')
for _ in range(5):
    t0 = time.perf_counter()
    evaluate_point(system, src, 2.0, spec=QUAD_FAST)
    best = min(best, time.perf_counter() - t0)
print(f"{fp_qsdc.BACKEND} pipeline_eval {best:.6f}")
"""


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    code = cli.main(["bench", "--nodes", str(args.nodes),
                     "--repeats", str(args.repeats)])
    if code != 0:
        return code
    print()
    times = {}
    for backend in ("python", "compiled"):
        proc = subprocess.run(
            [sys.executable, "-c", _PIPELINE_SNIPPET],
            env={"FP_QSDC_BACKEND": backend, "PATH": "/usr/bin:/bin"},
            capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"{backend} pipeline run failed:\n{proc.stderr}",
                  file=sys.stderr)
            continue
        line = proc.stdout.strip()
        print(line)
        times[backend] = float(line.split()[-1])
    if len(times) == 2:
        print(f"speedup pipeline_eval: {times['python'] / times['compiled']:.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
