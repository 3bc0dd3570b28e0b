"""Time the hot kernels with numba and with the plain numpy fallback.

Each backend runs in its own interpreter because the backend is fixed at
import time by ``WDNSTA_DISABLE_NUMBA``.

    python benchmarks/bench_kernels.py [--designs 2000] [--repeat 3]
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from wdnsta import _accel, kernels
from wdnsta.benchmarks import load_benchmark
from wdnsta.evaluator import BatchEvaluator

designs, repeat = int(sys.argv[1]), int(sys.argv[2])

def best_of(fn):
    fn()  # warm-up, includes compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)

out = {"backend": _accel.backend()}
for name in ("two-loop", "hanoi", "new-york"):
    net = load_benchmark(name)[0]
    batch = BatchEvaluator(net)
    idx = np.random.default_rng(0).integers(1, len(net.catalog) + 1, size=(designs, net.n_decisions))
    out[f"evaluate {name}"] = best_of(lambda: batch(idx))
draws = np.random.default_rng(1).random((2000, 1000, 3))
out["monte carlo 2000x1000"] = best_of(lambda: kernels.mc_runs(draws, 0.1, 0.1))
print(json.dumps(out))
"""


def run_backend(disable: bool, designs: int, repeat: int) -> dict:
    env = dict(os.environ, WDNSTA_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, str(designs), str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--designs", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    started = time.perf_counter()
    fast = run_backend(False, args.designs, args.repeat)
    slow = run_backend(True, args.designs, args.repeat)
    print(f"{'kernel':<24} {fast['backend']:>10} {slow['backend']:>10} {'speed-up':>9}")
    for key in fast:
        if key == "backend":
            continue
        print(f"{key:<24} {fast[key]:10.4f} {slow[key]:10.4f} {slow[key] / fast[key]:8.1f}x")
    print(f"({args.designs} designs per evaluate call, best of {args.repeat}; "
          f"total {time.perf_counter() - started:.0f}s)")


if __name__ == "__main__":
    main()
