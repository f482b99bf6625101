"""Voronoi-based local search.

The box is partitioned by Monte-Carlo: a large uniform batch is assigned to
the nearest archived site, the cells of the best 10% of sites form the local
region, and the candidate in that region with the lowest surrogate value is
sent to the true objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .archive import Archive, Origin
from .exceptions import BudgetExhausted, EmptyTopRegion
from .kernels import nearest_site, top_membership
from .problem import BudgetedEvaluator
from .sampling import uniform_batch, uniform_chunks
from .surrogate import fit, normalize

CANDIDATES_PER_SITE_AND_DIM = 1000
DEFAULT_DENSITY_CAP = 5_000_000
DEFAULT_TOP_FRACTION = 0.10
# rows per streamed chunk; several kernel blocks so witness sites pay off
SCREEN_CHUNK = 16 * 8192


@dataclass(frozen=True)
class CellAssignment:
    candidates: np.ndarray
    owner: np.ndarray
    sites: np.ndarray


def candidate_count(n_sites: int, dim: int, density_cap: int = DEFAULT_DENSITY_CAP) -> int:
    return max(1, min(n_sites * dim * CANDIDATES_PER_SITE_AND_DIM, density_cap))


def _box_center(bounds) -> np.ndarray:
    lo, hi = bounds
    return 0.5 * (np.asarray(lo, dtype=float) + np.asarray(hi, dtype=float))


def assign(candidates, sites, bounds=None) -> np.ndarray:
    """Index of the nearest site for every candidate (lowest index on ties)."""
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    origin = _box_center(bounds) if bounds is not None else sites.mean(axis=0)
    return nearest_site(candidates, sites, origin)


def partition(
    sites, bounds, rng: np.random.Generator, density_cap: int = DEFAULT_DENSITY_CAP
) -> CellAssignment:
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    n, d = sites.shape
    if n < 1:
        raise ValueError("need at least one site")
    cands = uniform_batch(candidate_count(n, d, density_cap), bounds, rng)
    return CellAssignment(cands, assign(cands, sites, bounds), sites)


def top_cells(values, fraction: float = DEFAULT_TOP_FRACTION) -> np.ndarray:
    """Indices of the ``ceil(fraction * N)`` (at least one) best sites.

    Sorted by value; equal values keep the lower index first.
    """
    values = np.asarray(values, dtype=float)
    # round first so that e.g. 0.1 * 30 does not ceil to 4
    k = max(1, math.ceil(round(fraction * values.shape[0], 9)))
    return np.argsort(values, kind="stable")[:k]


def _screen(archive, model, in_top, m, rng):
    bounds = archive.bounds
    origin = _box_center(bounds)
    sites = archive.points
    best_x, best_v = None, np.inf
    for block in uniform_chunks(m, bounds, rng, chunk=SCREEN_CHUNK):
        mask = top_membership(block, sites, in_top, origin)
        if not mask.any():
            continue
        cand = block[mask]
        vals = model.predict_normalized(normalize(cand, bounds))
        # a candidate sitting on an archived site would duplicate it; such
        # hits are vanishingly rare, so only the block winner is checked
        while True:
            j = int(np.argmin(vals))
            if not np.isfinite(vals[j]) or not archive.is_duplicate(cand[j]):
                break
            vals[j] = np.inf
        if vals[j] < best_v:
            best_x, best_v = cand[j].copy(), vals[j]
    return best_x


def local_round(
    archive: Archive,
    evaluator: BudgetedEvaluator,
    rng: np.random.Generator,
    density_cap: int = DEFAULT_DENSITY_CAP,
    top_fraction: float = DEFAULT_TOP_FRACTION,
) -> tuple[np.ndarray, float]:
    """One local-search step; consumes exactly one true evaluation.

    Candidates are streamed in blocks, so the full Monte-Carlo batch is never
    held in memory; the result equals screening ``partition(...)`` in one go.
    """
    if evaluator.remaining < 1:
        raise BudgetExhausted("no evaluations left for a local round")
    n, d = archive.points.shape
    model = fit(archive.points, archive.values, archive.bounds)
    in_top = np.zeros(n, dtype=bool)
    in_top[top_cells(archive.values, top_fraction)] = True
    m = candidate_count(n, d, density_cap)

    x = _screen(archive, model, in_top, m, rng)
    if x is None:
        x = _screen(archive, model, in_top, m, rng)
    if x is None:
        raise EmptyTopRegion(f"no candidate out of {m} fell inside the top cells")
    y = evaluator.evaluate(x)
    archive.add(x, y, Origin.LOCAL)
    return x, y
