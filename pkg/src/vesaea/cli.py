"""Command-line entry point: ``vesaea bench`` and ``vesaea run``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import bench
from .driver import contribution_ratio, run
from .exceptions import VesaeaError
from .kernels import BACKEND
from .problem import make_problem

# flag name -> config key; flags given on the command line override the file
_BENCH_FLAGS = {
    "problem": "problem",
    "dim": "dim",
    "runs": "runs",
    "seed": "seed",
    "out": "out",
    "budget_mult": "budget_mult",
    "init_mult": "init_mult",
    "workers": "workers",
    "density_cap": "density_cap",
    "top_fraction": "top_fraction",
    "pso_particles": "pso_particles",
    "pso_iterations": "pso_iterations",
    "pso_w_start": "pso_w_start",
    "pso_w_end": "pso_w_end",
    "pso_c1": "pso_c1",
    "pso_c2": "pso_c2",
    "pso_vmax_fraction": "pso_vmax_fraction",
}
_BENCH_SWITCHES = ("ablation", "baseline", "no_local_search")


def _add_bench(sub):
    p = sub.add_parser("bench", help="run the benchmark protocol and write CSV/report outputs")
    p.add_argument("--config", type=Path, help="flat key=value file mirroring these flags")
    p.add_argument("--problem", help="problem name, comma list, or 'all' (default: all)")
    p.add_argument("--dim", help="comma/space separated dimensions (default: 5,10,15,20,30)")
    p.add_argument("--runs", help="independent runs per configuration (default: 25)")
    p.add_argument("--seed", help="master seed; run r uses seed + r (default: 0)")
    p.add_argument("--out", help="output directory (default: results)")
    p.add_argument("--budget-mult", dest="budget_mult", help="total budget per dimension (default: 5)")
    p.add_argument("--init-mult", dest="init_mult", help="initial design per dimension (default: 2)")
    p.add_argument("--workers", help="parallel worker processes (default: 1)")
    p.add_argument("--density-cap", dest="density_cap", help="max Monte-Carlo candidates per local round")
    p.add_argument("--top-fraction", dest="top_fraction", help="fraction of best Voronoi cells (default: 0.1)")
    for key in ("particles", "iterations", "w_start", "w_end", "c1", "c2", "vmax_fraction"):
        p.add_argument(f"--pso-{key.replace('_', '-')}", dest=f"pso_{key}")
    p.add_argument("--ablation", action="store_true", default=None,
                   help="also run the variant without Voronoi local search")
    p.add_argument("--baseline", action="store_true", default=None,
                   help="also run uniform random search with the same budget")
    p.add_argument("--no-local-search", dest="no_local_search", action="store_true", default=None,
                   help="run only the variant without local search as the primary algorithm")
    p.set_defaults(func=_cmd_bench)


def _add_run(sub):
    p = sub.add_parser("run", help="optimize a single benchmark once and print the result")
    p.add_argument("--problem", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-local-search", dest="no_local_search", action="store_true")
    p.add_argument("--csv", type=Path, help="write the convergence history here")
    p.set_defaults(func=_cmd_run)


def _cmd_bench(args) -> int:
    settings = bench.read_config_file(args.config) if args.config else {}
    for flag, key in _BENCH_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            settings[key] = str(value)
    for key in _BENCH_SWITCHES:
        if getattr(args, key):
            settings[key] = "true"
    settings.setdefault("out", "results")
    cfg = bench.config_from_settings(settings)

    t0 = time.perf_counter()
    rows = bench.run_experiment(cfg)
    for row in rows:
        print(f"{row.problem:<10} D={row.dim:<3} {row.variant:<16} {row.mean:.3e} +- {row.std:.3e}")
    print(f"wrote {cfg.out_dir} ({time.perf_counter() - t0:.1f}s, kernels: {BACKEND})")
    return 0


def _cmd_run(args) -> int:
    problem = make_problem(args.problem, args.dim, args.seed)
    t0 = time.perf_counter()
    record = run(problem, use_local=not args.no_local_search, seed=args.seed)
    elapsed = time.perf_counter() - t0
    ratio = contribution_ratio(record)
    print(f"problem     {problem.name} D={problem.dim} seed={args.seed}")
    print(f"evaluations {len(record)}")
    print(f"final best  {record.final_best:.6e}")
    print(f"contrib.    global={ratio.global_ratio:.3f} local={ratio.local_ratio:.3f}")
    print(f"time        {elapsed:.2f}s (kernels: {BACKEND})")
    if args.csv:
        args.csv.write_text(record.to_csv())
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="vesaea", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_bench(sub)
    _add_run(sub)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (VesaeaError, OSError) as exc:
        print(f"vesaea: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
