"""Experiment harness: repeated runs, summary statistics and output files.

Outputs written by :func:`run_experiment` into ``config.out_dir``:

``summary.csv``
    one row per (problem, dimension, variant) with mean/std of the final
    best values over all runs and the per-run finals;
``convergence/<problem>_<D>_<variant>_<run>.csv``
    one row per true evaluation (``evaluation_index,value,best_so_far,origin_stage``);
``report.txt``
    rank-sum comparisons between variants and stage contribution ratios.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import stats

from .archive import Origin
from .driver import RunRecord, contribution_ratio, run
from .exceptions import ConfigError, MismatchedRuns
from .local_search import DEFAULT_DENSITY_CAP, DEFAULT_TOP_FRACTION
from .problem import BenchmarkProblem, BudgetedEvaluator, Kind, make_problem
from .pso import PsoParams
from .sampling import STREAM_BASELINE, stream, uniform_batch

log = logging.getLogger(__name__)

VESAEA = "vesaea"
WOVLS = "vesaea-wovls"
RANDOM = "random-baseline"
PAPER_DIMS = (5, 10, 15, 20, 30)


@dataclass
class ExperimentConfig:
    problems: list[tuple[str, int]] = field(default_factory=list)
    runs: int = 25
    budget_multiplier: int = 5
    init_multiplier: int = 2
    master_seed: int = 0
    ablation: bool = False
    baseline: bool = False
    no_local_search: bool = False
    out_dir: Path | None = None
    workers: int = 1
    pso: PsoParams = field(default_factory=PsoParams)
    density_cap: int = DEFAULT_DENSITY_CAP
    top_fraction: float = DEFAULT_TOP_FRACTION

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be positive")
        if self.budget_multiplier <= self.init_multiplier:
            raise ConfigError("budget multiplier must exceed init multiplier")
        if not 0.0 < self.top_fraction <= 1.0:
            raise ConfigError("top fraction must be in (0, 1]")
        self.problems = [(Kind.parse(k).value, int(d)) for k, d in self.problems]

    @property
    def variants(self) -> list[str]:
        names = [WOVLS if self.no_local_search else VESAEA]
        if self.ablation and WOVLS not in names:
            names.append(WOVLS)
        if self.baseline:
            names.append(RANDOM)
        return names

    def seed(self, run_index: int) -> int:
        return self.master_seed + run_index


@dataclass
class SummaryRow:
    problem: str
    dim: int
    variant: str
    finals: list[float]
    global_ratio: float | None = None
    local_ratio: float | None = None

    @property
    def mean(self) -> float:
        return float(np.mean(self.finals))

    @property
    def std(self) -> float:
        if len(self.finals) < 2:
            return 0.0
        return float(np.std(self.finals, ddof=1))


class Comparison(NamedTuple):
    statistic: float
    p_value: float
    median_diff: float


def random_baseline(problem: BenchmarkProblem, budget: int | None = None, seed: int = 0) -> RunRecord:
    """Uniform random search with the same evaluation budget."""
    budget = 5 * problem.dim if budget is None else int(budget)
    if budget < 1:
        raise ConfigError("budget must be positive")
    evaluator = BudgetedEvaluator(problem, budget)
    pts = uniform_batch(budget, problem.bounds, stream(seed, STREAM_BASELINE))
    vals = np.array([evaluator.evaluate(x) for x in pts])
    return RunRecord(
        points=pts,
        values=vals,
        origins=[Origin.RANDOM] * budget,
        init_size=0,
        problem=problem.name,
        dim=problem.dim,
        seed=seed,
        variant=RANDOM,
    )


def compare_variants(a, b) -> Comparison:
    """Wilcoxon rank-sum test between two sets of per-run finals.

    ``a`` and ``b`` are :class:`SummaryRow` objects or plain sequences.
    ``median_diff`` is ``median(a) - median(b)``.
    """
    fa = np.asarray(a.finals if isinstance(a, SummaryRow) else a, dtype=float)
    fb = np.asarray(b.finals if isinstance(b, SummaryRow) else b, dtype=float)
    if fa.shape != fb.shape or fa.size == 0:
        raise MismatchedRuns(f"cannot compare {fa.size} runs against {fb.size}")
    res = stats.ranksums(fa, fb)
    return Comparison(float(res.statistic), float(res.pvalue), float(np.median(fa) - np.median(fb)))


def single_run(kind: str, dim: int, variant: str, seed: int, config: ExperimentConfig) -> RunRecord:
    # one shifted instance per (problem, master seed); runs differ only in their streams
    problem = make_problem(kind, dim, config.master_seed)
    budget = config.budget_multiplier * dim
    if variant == RANDOM:
        return random_baseline(problem, budget, seed)
    return run(
        problem,
        total_budget=budget,
        init_size=config.init_multiplier * dim,
        use_local=(variant == VESAEA),
        seed=seed,
        pso_params=config.pso,
        density_cap=config.density_cap,
        top_fraction=config.top_fraction,
    )


def _job(args):
    kind, dim, variant, r, config = args
    return (kind, dim, variant, r), single_run(kind, dim, variant, config.seed(r), config)


def convergence_name(kind: str, dim: int, variant: str, run_index: int) -> str:
    return f"{kind}_{dim}_{variant}_{run_index}.csv"


def run_all(config: ExperimentConfig) -> dict[tuple, RunRecord]:
    """Execute every configured run; keys are ``(problem, dim, variant, run)``."""
    jobs = [
        (kind, dim, variant, r, config)
        for kind, dim in config.problems
        for variant in config.variants
        for r in range(config.runs)
    ]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = dict(pool.map(_job, jobs))
    else:
        results = dict(map(_job, jobs))
    return results


def summarize(config: ExperimentConfig, records: dict[tuple, RunRecord]) -> list[SummaryRow]:
    rows = []
    for kind, dim in config.problems:
        for variant in config.variants:
            recs = [records[(kind, dim, variant, r)] for r in range(config.runs)]
            row = SummaryRow(kind, dim, variant, [rec.final_best for rec in recs])
            if variant != RANDOM:
                ratios = [contribution_ratio(rec) for rec in recs]
                ratios = [c for c in ratios if not c.no_improvement]
                if ratios:
                    row.global_ratio = float(np.mean([c.global_ratio for c in ratios]))
                    row.local_ratio = float(np.mean([c.local_ratio for c in ratios]))
            rows.append(row)
    return rows


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def summary_csv(rows: list[SummaryRow]) -> str:
    lines = ["problem,dim,variant,runs,mean,std,global_ratio,local_ratio,finals"]
    for row in rows:
        finals = " ".join(repr(float(v)) for v in row.finals)
        lines.append(
            f"{row.problem},{row.dim},{row.variant},{len(row.finals)},{_fmt(row.mean)},"
            f"{_fmt(row.std)},{_fmt(row.global_ratio)},{_fmt(row.local_ratio)},{finals}"
        )
    return "\n".join(lines) + "\n"


def report_text(config: ExperimentConfig, rows: list[SummaryRow]) -> str:
    by_key = {(r.problem, r.dim, r.variant): r for r in rows}
    out = [
        "Wilcoxon rank-sum comparisons (median_diff = median(first) - median(second))",
        f"runs per configuration: {config.runs}; master seed: {config.master_seed}",
        "",
    ]
    for kind, dim in config.problems:
        out.append(f"[{kind} D={dim}]")
        for variant in config.variants:
            row = by_key[(kind, dim, variant)]
            line = f"  {variant:<16} mean={row.mean:.6e} std={row.std:.6e}"
            if row.local_ratio is not None:
                line += f" contribution global={row.global_ratio:.3f} local={row.local_ratio:.3f}"
            out.append(line)
        names = config.variants
        for i, first in enumerate(names):
            for second in names[i + 1:]:
                cmp = compare_variants(by_key[(kind, dim, first)], by_key[(kind, dim, second)])
                out.append(
                    f"  {first} vs {second}: p={cmp.p_value:.4e} median_diff={cmp.median_diff:.6e}"
                )
        out.append("")
    return "\n".join(out)


def write_outputs(config: ExperimentConfig, records, rows) -> None:
    out = Path(config.out_dir)
    try:
        conv = out / "convergence"
        conv.mkdir(parents=True, exist_ok=True)
        for (kind, dim, variant, r), rec in sorted(records.items()):
            (conv / convergence_name(kind, dim, variant, r)).write_text(rec.to_csv())
        (out / "summary.csv").write_text(summary_csv(rows))
        (out / "report.txt").write_text(report_text(config, rows))
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc


def run_experiment(config: ExperimentConfig) -> list[SummaryRow]:
    records = run_all(config)
    rows = summarize(config, records)
    if config.out_dir is not None:
        write_outputs(config, records, rows)
    return rows


# ---------------------------------------------------------------------------
# flat key=value configuration files

_BOOL_KEYS = {"ablation", "baseline", "no_local_search"}
_PSO_KEYS = {
    "pso_particles": "particles",
    "pso_iterations": "iterations",
    "pso_w_start": "w_start",
    "pso_w_end": "w_end",
    "pso_c1": "c1",
    "pso_c2": "c2",
    "pso_vmax_fraction": "vmax_fraction",
}
CONFIG_KEYS = {
    "problem", "dim", "runs", "seed", "out", "budget_mult", "init_mult",
    "workers", "density_cap", "top_fraction", *_BOOL_KEYS, *_PSO_KEYS,
}


def _parse_bool(key: str, raw: str) -> bool:
    val = raw.strip().lower()
    if val in ("1", "true", "yes", "on", ""):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes equal underscores."""
    settings = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        settings[key] = value
    return settings


def _parse_problems(problem: str, dims: str) -> list[tuple[str, int]]:
    if problem.strip().lower() == "all":
        kinds = [k.value for k in Kind]
    else:
        kinds = [Kind.parse(p).value for p in problem.split(",") if p.strip()]
    try:
        dim_list = [int(d) for d in dims.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"bad dimension list {dims!r}") from None
    if not kinds or not dim_list:
        raise ConfigError("need at least one problem and one dimension")
    return [(k, d) for k in kinds for d in dim_list]


def config_from_settings(settings: dict[str, str]) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from string settings (file or CLI)."""
    try:
        pso_kwargs = {}
        for key, attr in _PSO_KEYS.items():
            if key in settings:
                conv = int if attr in ("particles", "iterations") else float
                pso_kwargs[attr] = conv(settings[key])
        cfg = ExperimentConfig(
            problems=_parse_problems(settings.get("problem", "all"),
                                     settings.get("dim", " ".join(map(str, PAPER_DIMS)))),
            runs=int(settings.get("runs", 25)),
            budget_multiplier=int(settings.get("budget_mult", 5)),
            init_multiplier=int(settings.get("init_mult", 2)),
            master_seed=int(settings.get("seed", 0)),
            ablation=_parse_bool("ablation", settings.get("ablation", "false")),
            baseline=_parse_bool("baseline", settings.get("baseline", "false")),
            no_local_search=_parse_bool("no_local_search", settings.get("no_local_search", "false")),
            out_dir=Path(settings["out"]) if settings.get("out") else None,
            workers=int(settings.get("workers", 1)),
            pso=replace(PsoParams(), **pso_kwargs),
            density_cap=int(settings.get("density_cap", DEFAULT_DENSITY_CAP)),
            top_fraction=float(settings.get("top_fraction", DEFAULT_TOP_FRACTION)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def config_to_text(cfg: ExperimentConfig) -> str:
    """Render ``cfg`` in the key=value format.

    Problems are written as a problem list times a dimension list, so only
    full cross products round-trip exactly.
    """
    kinds = sorted({k for k, _ in cfg.problems}, key=[k.value for k in Kind].index)
    dims = sorted({d for _, d in cfg.problems})
    lines = [
        f"problem = {','.join(kinds)}",
        f"dim = {','.join(map(str, dims))}",
        f"runs = {cfg.runs}",
        f"seed = {cfg.master_seed}",
        f"budget_mult = {cfg.budget_multiplier}",
        f"init_mult = {cfg.init_multiplier}",
        f"ablation = {str(cfg.ablation).lower()}",
        f"baseline = {str(cfg.baseline).lower()}",
        f"no_local_search = {str(cfg.no_local_search).lower()}",
        f"workers = {cfg.workers}",
        f"density_cap = {cfg.density_cap}",
        f"top_fraction = {cfg.top_fraction!r}",
    ]
    for key, attr in _PSO_KEYS.items():
        lines.append(f"{key} = {getattr(cfg.pso, attr)!r}")
    if cfg.out_dir is not None:
        lines.append(f"out = {cfg.out_dir}")
    return "\n".join(lines) + "\n"


__all__ = [
    "Comparison",
    "ExperimentConfig",
    "SummaryRow",
    "compare_variants",
    "config_from_settings",
    "random_baseline",
    "read_config_file",
    "run_experiment",
]
