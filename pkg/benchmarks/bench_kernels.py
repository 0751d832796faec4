"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--samples N] [--rows N]

Times run-length statistics over a batch of rows and repair sampling on the
bundled small scenario.  Both backends consume the same random stream, so the
script also checks that they return identical schedules.
"""

import argparse
import time

import numpy as np

from rosterlearn import _fallback
from rosterlearn.evaluation import builtin_scenario
from rosterlearn.generator import Layout, sample_bitgen

try:
    from rosterlearn import _kernels
except ImportError:  # pragma: no cover - only without a compiler
    _kernels = None


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def bench_run_stats(rows, repeat):
    data = (np.random.default_rng(0).random((rows, 28)) < 0.4).astype(np.uint8)
    result = {}
    for name, mod in (("cython", _kernels), ("python", _fallback)):
        if mod is not None:
            result[name] = timed(lambda: mod.run_stats(data), repeat)
    if len(result) == 2:
        assert np.array_equal(result["cython"][1], result["python"][1])
    return {k: v[0] for k, v in result.items()}


def bench_repair(samples, scenario):
    sc = builtin_scenario(scenario)
    gen = sc.generator
    layout = Layout(sc.schema, sc.target.constraints)
    result = {}
    for name, mod in (("cython", _kernels), ("python", _fallback)):
        if mod is None:
            continue
        outs, steps = [], 0
        start = time.perf_counter()
        for i in range(samples):
            X = np.zeros(layout.n_cells, dtype=np.uint8)
            ok, used = mod.repair(X, layout, sample_bitgen(0, i), gen.max_repair_steps,
                                  gen.restarts, gen.initial_density, gen.noise, gen.mix_steps)
            outs.append((ok, X.tobytes()))
            steps += used
        result[name] = (time.perf_counter() - start, steps, outs)
    if len(result) == 2:
        assert result["cython"][2] == result["python"][2], "backends disagree"
    return {k: v[:2] for k, v in result.items()}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--rows", type=int, default=20_000, help="rows for run_stats")
    p.add_argument("--samples", type=int, default=3, help="repair samples per backend")
    p.add_argument("--scenario", default="small")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()

    rs = bench_run_stats(args.rows, args.repeat)
    print(f"run_stats, {args.rows} rows x 28")
    for name, sec in rs.items():
        print(f"  {name:<7} {sec * 1000:9.2f} ms")
    if len(rs) == 2:
        print(f"  speed-up {rs['python'] / rs['cython']:.1f}x")

    rp = bench_repair(args.samples, args.scenario)
    print(f"repair, {args.samples} samples of scenario {args.scenario!r}")
    for name, (sec, steps) in rp.items():
        print(f"  {name:<7} {sec / args.samples * 1000:9.1f} ms/sample  "
              f"{sec / max(steps, 1) * 1e6:7.2f} us/step")
    if len(rp) == 2:
        print(f"  speed-up {rp['python'][0] / rp['cython'][0]:.1f}x; outputs identical")


if __name__ == "__main__":
    main()
