"""The main optimization loop with its performance selector."""

from __future__ import annotations

import enum
import io
import json
import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import global_search, local_search
from .archive import Archive, Origin
from .exceptions import ConfigError, EmptyTopRegion
from .problem import BenchmarkProblem, BudgetedEvaluator
from .pso import PsoParams
from .sampling import STREAM_INIT, STREAM_MC, STREAM_PSO, lhs, stream

log = logging.getLogger(__name__)

CSV_HEADER = "evaluation_index,value,best_so_far,origin_stage\n"


class Stage(enum.Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass
class PerformanceSelector:
    """Round-level switch between global and local search.

    A round that strictly lowers the best archived value keeps the current
    stage; any other round hands over to the other stage. Without local
    search the selector never leaves ``GLOBAL``.
    """

    use_local: bool = True
    current_stage: Stage = Stage.GLOBAL
    best_before_round: float = np.inf

    def begin_round(self, best: float) -> Stage:
        self.best_before_round = best
        return self.current_stage

    def end_round(self, best_after: float) -> bool:
        improved = best_after < self.best_before_round
        if not improved and self.use_local:
            self.current_stage = Stage.LOCAL if self.current_stage is Stage.GLOBAL else Stage.GLOBAL
        return improved


@dataclass
class RunRecord:
    """Everything a run produced, one entry per true evaluation."""

    points: np.ndarray
    values: np.ndarray
    origins: list[Origin]
    init_size: int
    problem: str = ""
    dim: int = 0
    seed: int = 0
    variant: str = "vesaea"
    rounds: list[tuple[Stage, bool]] = field(default_factory=list)

    @property
    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.values, dtype=float))

    @property
    def final_best(self) -> float:
        return float(np.min(self.values))

    @property
    def best_point(self) -> np.ndarray:
        return np.asarray(self.points)[int(np.argmin(self.values))]

    def __len__(self) -> int:
        return len(self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER)
        for i, (v, b, o) in enumerate(zip(self.values, self.best_so_far, self.origins), start=1):
            buf.write(f"{i},{float(v)!r},{float(b)!r},{o.value}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "problem": self.problem,
                "dim": self.dim,
                "seed": self.seed,
                "variant": self.variant,
                "init_size": self.init_size,
                "points": np.asarray(self.points).tolist(),
                "values": [float(v) for v in self.values],
                "origins": [o.value for o in self.origins],
                "rounds": [[s.value, imp] for s, imp in self.rounds],
                "contribution": contribution_ratio(self)._asdict(),
            },
            sort_keys=True,
        )


class ContributionRatio(NamedTuple):
    global_ratio: float
    local_ratio: float
    no_improvement: bool
    global_share: float
    local_share: float


def contribution_ratio(record: RunRecord) -> ContributionRatio:
    """Share of post-initialization improvements made by each stage.

    Ratios count strict best-so-far improvements; the ``*_share`` fields
    weigh each improvement by how much it lowered the best value instead.
    """
    values = np.asarray(record.values, dtype=float)
    best = values[: record.init_size].min() if record.init_size else np.inf
    counts = {"global": 0, "local": 0}
    gains = {"global": 0.0, "local": 0.0}
    for v, o in zip(values[record.init_size:], record.origins[record.init_size:]):
        if v < best:
            key = "local" if o is Origin.LOCAL else "global" if o.is_global else None
            if key:
                counts[key] += 1
                if np.isfinite(best):
                    gains[key] += best - v
            best = v
    total = counts["global"] + counts["local"]
    if total == 0:
        return ContributionRatio(0.0, 0.0, True, 0.0, 0.0)
    gain = gains["global"] + gains["local"]
    gshare = gains["global"] / gain if gain > 0 else 0.0
    lshare = gains["local"] / gain if gain > 0 else 0.0
    return ContributionRatio(counts["global"] / total, counts["local"] / total, False, gshare, lshare)


def run(
    problem: BenchmarkProblem,
    total_budget: int | None = None,
    init_size: int | None = None,
    use_local: bool = True,
    seed: int = 0,
    pso_params: PsoParams | None = None,
    density_cap: int = local_search.DEFAULT_DENSITY_CAP,
    top_fraction: float = local_search.DEFAULT_TOP_FRACTION,
) -> RunRecord:
    """Minimize ``problem`` with exactly ``total_budget`` true evaluations.

    Defaults follow the ``5D`` budget with a ``2D`` Latin hypercube start.
    Random streams for initialization, PSO and Monte-Carlo sampling are
    derived from ``seed`` independently, so ``use_local=False`` reproduces
    the same initial design.
    """
    d = problem.dim
    total_budget = 5 * d if total_budget is None else int(total_budget)
    init_size = 2 * d if init_size is None else int(init_size)
    if init_size < d + 3:
        raise ConfigError(f"init_size {init_size} must be at least D + 3 = {d + 3}")
    if total_budget <= init_size:
        raise ConfigError("total_budget must exceed init_size")

    evaluator = BudgetedEvaluator(problem, total_budget)
    archive = Archive(problem.bounds, capacity=total_budget)
    init_rng = stream(seed, STREAM_INIT)
    pso_rng = stream(seed, STREAM_PSO)
    mc_rng = stream(seed, STREAM_MC)

    for x in lhs(init_size, problem.bounds, init_rng):
        archive.add(x, evaluator.evaluate(x), Origin.INIT)

    selector = PerformanceSelector(use_local=use_local)
    rounds = []
    while evaluator.remaining > 0:
        stage = selector.begin_round(archive.best_value)
        if stage is Stage.GLOBAL:
            global_search.global_round(archive, evaluator, pso_rng, pso_params)
        else:
            try:
                local_search.local_round(archive, evaluator, mc_rng, density_cap, top_fraction)
            except EmptyTopRegion:
                log.warning("local round found no candidate in the top cells; switching stage")
        rounds.append((stage, selector.end_round(archive.best_value)))

    assert evaluator.spent == total_budget
    return RunRecord(
        points=archive.points.copy(),
        values=archive.values.copy(),
        origins=list(archive.origins),
        init_size=init_size,
        problem=problem.name,
        dim=d,
        seed=seed,
        variant="vesaea" if use_local else "vesaea-wovls",
        rounds=rounds,
    )
