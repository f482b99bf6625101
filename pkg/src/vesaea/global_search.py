"""Global search round: LOOCV-error sample, then surrogate-optimum sample."""

from __future__ import annotations

import numpy as np

from . import pso
from .archive import Archive, Origin
from .exceptions import BudgetExhausted
from .problem import BudgetedEvaluator
from .sampling import uniform_batch
from .surrogate import fit, fit_loocv_model, loocv_errors


def _distinct(x: np.ndarray, archive: Archive, rng: np.random.Generator) -> np.ndarray:
    # a proposal sitting on an archived point would make the next fit singular
    while archive.is_duplicate(x):
        x = uniform_batch(1, archive.bounds, rng)[0]
    return x


def propose_max_loocv(archive: Archive, rng, params=None) -> np.ndarray:
    """PSO argmax of the interpolated leave-one-out error surface."""
    bounds = archive.bounds
    errors = loocv_errors(archive.points, archive.values, bounds)
    model = fit_loocv_model(archive.points, errors, bounds)
    x, _ = pso.optimize(model.predict, bounds, pso.Direction.MAXIMIZE, rng, params)
    return x


def propose_surrogate_min(archive: Archive, rng, params=None) -> np.ndarray:
    """PSO argmin of the fitness surrogate built on the whole archive."""
    bounds = archive.bounds
    model = fit(archive.points, archive.values, bounds)
    x, _ = pso.optimize(model.predict, bounds, pso.Direction.MINIMIZE, rng, params)
    return x


def global_round(
    archive: Archive,
    evaluator: BudgetedEvaluator,
    rng: np.random.Generator,
    params: pso.PsoParams | None = None,
) -> list[tuple[np.ndarray, float]]:
    """Run one global round and return the newly evaluated pairs in order.

    The second stage is skipped when the first one used the last evaluation.
    Both new points are appended to ``archive`` before returning.
    """
    if evaluator.remaining < 1:
        raise BudgetExhausted("no evaluations left for a global round")
    new = []

    x = _distinct(propose_max_loocv(archive, rng, params), archive, rng)
    y = evaluator.evaluate(x)
    archive.add(x, y, Origin.GLOBAL_LOOCV)
    new.append((x, y))
    if evaluator.remaining < 1:
        return new

    x = _distinct(propose_surrogate_min(archive, rng, params), archive, rng)
    y = evaluator.evaluate(x)
    archive.add(x, y, Origin.GLOBAL_SURROGATE)
    new.append((x, y))
    return new
