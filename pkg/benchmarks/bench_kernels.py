#!/usr/bin/env python3
"""Benchmark the jitted kernels against the pure-numpy/python fallback.

Runs each case in this process (normally the numba backend), then re-runs
itself in a subprocess with QMARGINAL_DISABLE_NUMBA=1 and prints a
comparison table.  Warmup calls keep JIT compilation out of the timings.
"""

import argparse
import json
import math
import os
import subprocess
import sys
import time

import numpy as np

from qmarginal._backend import active_backend
from qmarginal._kernels import scatter_terms, sweep
from qmarginal.combinatorics import enumerate_partitions
from qmarginal.diagrams import kept_wires, materialize, symmetrizer_contraction
from qmarginal.scenario import JointContext, MarginalScenario

PAIR = MarginalScenario(JointContext(("A", "B"), (2, 2)), (("A",), ("B",)))
CHAIN = MarginalScenario(
    JointContext(("A", "B", "C"), (2, 2, 2)), (("A", "B"), ("B", "C"))
)


def _ones_weights(k: int) -> dict:
    return {ct: 1 for ct in enumerate_partitions(k, k)}


def _sweep_case(scenario: MarginalScenario, n: int):
    kept = kept_wires(scenario, n)
    k = n * scenario.m
    kept_lists = [kept[lab] for lab in scenario.joint.labels]
    dims = scenario.joint.dims
    weights = _ones_weights(k)
    return lambda: sweep(k, kept_lists, dims, weights)


def _scatter_case(side: int, nterms: int):
    rng = np.random.default_rng(0)
    rows = np.stack(
        [rng.permutation(side) for _ in range(nterms)], axis=1
    ).astype(np.int64)
    coeffs = rng.integers(1, 100, size=nterms).astype(float)

    def run():
        out = np.zeros((side, side))
        scatter_terms(out, rows, coeffs)
        return out

    return run


def _materialize_case(scenario: MarginalScenario, n: int):
    def run():
        return materialize(symmetrizer_contraction(scenario, n))

    return run


CASES = [
    ("sweep pair n=3 (6! perms)", lambda: _sweep_case(PAIR, 3)),
    ("sweep pair n=4 (8! perms)", lambda: _sweep_case(PAIR, 4)),
    ("sweep chain n=2 (4! perms)", lambda: _sweep_case(CHAIN, 2)),
    ("scatter 1024x1024, 512 terms", lambda: _scatter_case(1024, 512)),
    ("materialize pair n=4 (256x256)", lambda: _materialize_case(PAIR, 4)),
]


def run_suite(repeat: int) -> dict[str, float]:
    results = {}
    for name, make in CASES:
        fn = make()
        fn()  # warmup: JIT compile / cache load
        best = math.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        results[name] = best
    return results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3, help="timed runs per case (best is kept)")
    parser.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    mine = run_suite(args.repeat)
    if args.inner:
        print(json.dumps({"backend": active_backend(), "times": mine}))
        return 0

    if active_backend() != "numba":
        print("numba backend unavailable or disabled; timing the fallback only")
        for name, t in mine.items():
            print(f"{name:<34} {t:>10.4f}s")
        return 0

    env = dict(os.environ, QMARGINAL_DISABLE_NUMBA="1")
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--inner", "--repeat", str(args.repeat)],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    other = json.loads(proc.stdout)
    assert other["backend"] == "python", "fallback subprocess did not disable numba"

    print(f"{'case':<34} {'numba':>10} {'python':>10} {'speedup':>9}")
    for name in mine:
        a, b = mine[name], other["times"][name]
        print(f"{name:<34} {a:>9.4f}s {b:>9.4f}s {b / a:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
