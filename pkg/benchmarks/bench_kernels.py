"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Workloads mirror the optimizer at D=30 near the end of a run (150 sites, one
screening chunk of candidates) and at D=10. Each kernel is run on identical
inputs per backend; owner and membership outputs must agree bit for bit, while TPS values
may differ by a few ulps (different summation order).
"""

import argparse
import time

import numpy as np

from vesaea import kernels
from vesaea.local_search import SCREEN_CHUNK


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(rng):
    for dim, n in ((10, 50), (30, 150)):
        cands = rng.random((SCREEN_CHUNK, dim))
        sites = rng.random((n, dim))
        in_top = np.zeros(n, dtype=bool)
        in_top[rng.choice(n, max(1, n // 10), replace=False)] = True
        origin = np.full(dim, 0.5)
        weights, poly = rng.normal(size=n), rng.normal(size=dim + 1)
        lo, width = np.zeros(dim), np.ones(dim)
        yield f"nearest_site     D={dim:2d} N={n}", lambda k: k.nearest_site(cands, sites, origin)
        yield f"top_membership   D={dim:2d} N={n}", lambda k: k.top_membership(cands, sites, in_top, origin)
        yield f"tps_eval         D={dim:2d} N={n}", lambda k: k.tps_eval(cands, sites, weights, poly)
        yield f"scale_unit       D={dim:2d}", lambda k: k.scale_unit(cands.copy(), lo, width, width)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = kernels.backends()
    names = list(impls)
    print(f"{SCREEN_CHUNK} candidates per call; best of {args.repeat}; backends: {', '.join(names)}")
    print(f"{'kernel':30s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, call in workloads(np.random.default_rng(args.seed)):
        outs = [call(impls[n]) for n in names]
        note = ""
        if outs[0] is not None and outs[0].dtype.kind == "f":
            gap = max(np.max(np.abs(outs[0] - o) / (1 + np.abs(outs[0]))) for o in outs[1:]) if len(outs) > 1 else 0.0
            note = f"   max rel diff {gap:.1e}"
        elif outs[0] is not None and not all(np.array_equal(outs[0], o) for o in outs[1:]):
            raise SystemExit(f"{label}: backends disagree")
        times = [best_of(lambda: call(impls[n]), args.repeat) for n in names]
        line = f"{label:30s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times)
        if len(times) > 1:
            line += f"{times[0] / times[1]:11.1f}x"
        print(line + note)


if __name__ == "__main__":
    main()
