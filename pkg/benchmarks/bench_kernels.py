"""Compare the compiled and numpy selection kernels.

    python3 benchmarks/bench_kernels.py [--models 50] [--thresholds 200]

Both backends are run on the same random models and their outputs are
checked for equality before timings are reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from edgeperf import _kernels_py
from edgeperf.models import evaluate_arrays
from edgeperf.optimizer import DecisionDomain
from edgeperf.synthetic import random_system_model

try:
    from edgeperf import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _time(fn, *args, repeat: int = 3) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--models", type=int, default=50)
    ap.add_argument("--thresholds", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    n, q = DecisionDomain().flat()
    cases = []
    for _ in range(args.models):
        total, prec = evaluate_arrays(random_system_model(rng), n, q)
        limits = np.linspace(total.min() * 0.9, total.max() * 1.1, args.thresholds)
        floors = np.linspace(prec.min() - 0.05, prec.max() + 0.05, args.thresholds)
        cases.append((total, prec, limits, floors))

    backends = {"numpy": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    else:
        print("compiled kernels not built; timing the numpy fallback only")

    results = {}
    for name, mod in backends.items():
        def run_all(mod=mod):
            return [(mod.select_p1(t, p, lim), mod.select_p2(t, p, fl)) for t, p, lim, fl in cases]

        secs, out = _time(run_all)
        results[name] = (secs, out)
        per = secs / (args.models * args.thresholds * 2) * 1e6
        print(f"{name:>7}: {secs * 1e3:9.2f} ms total, {per:7.2f} us per solve")

    if len(results) == 2:
        (_, a), (_, b) = results["numpy"], results["cython"]
        same = all(np.array_equal(x[0], y[0]) and np.array_equal(x[1], y[1]) for x, y in zip(a, b))
        print(f"outputs identical: {same}")
        print(f"speed-up: {results['numpy'][0] / results['cython'][0]:.1f}x")


if __name__ == "__main__":
    main()
