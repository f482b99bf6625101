"""Inertia-weight particle swarm optimizer for cheap surrogate landscapes."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .sampling import uniform_batch


class Direction(enum.Enum):
    MINIMIZE = 1.0
    MAXIMIZE = -1.0


@dataclass(frozen=True)
class PsoParams:
    particles: int = 50
    iterations: int = 100
    w_start: float = 0.9
    w_end: float = 0.4
    c1: float = 2.0
    c2: float = 2.0
    vmax_fraction: float = 0.2

    def __post_init__(self):
        if self.particles < 1 or self.iterations < 0:
            raise ValueError("need at least one particle and a non-negative iteration count")
        if self.vmax_fraction <= 0:
            raise ValueError("vmax_fraction must be positive")


@dataclass
class SwarmState:
    positions: np.ndarray
    velocities: np.ndarray
    pbest_pos: np.ndarray
    pbest_val: np.ndarray
    gbest_pos: np.ndarray
    gbest_val: float
    iteration: int
    direction: Direction


def optimize(
    f: Callable[[np.ndarray], np.ndarray],
    bounds,
    direction: Direction = Direction.MINIMIZE,
    rng: np.random.Generator | None = None,
    params: PsoParams | None = None,
    callback: Callable[[SwarmState], None] | None = None,
) -> tuple[np.ndarray, float]:
    """Optimize a vectorized function ``f`` over a box with PSO.

    ``f`` receives an ``(M, D)`` array and must return ``M`` values. Returns
    the best position visited and its (unsigned) value. ``callback`` is
    called with the swarm after initialization and after every iteration.
    """
    params = params or PsoParams()
    rng = rng if rng is not None else np.random.default_rng()
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    sign = direction.value
    vmax = params.vmax_fraction * (hi - lo)

    x = uniform_batch(params.particles, (lo, hi), rng)
    v = np.zeros_like(x)
    score = sign * np.asarray(f(x), dtype=float)
    pbest = x.copy()
    pscore = score.copy()
    g = int(np.argmin(pscore))
    state = SwarmState(x, v, pbest, sign * pscore, pbest[g].copy(), float(sign * pscore[g]), 0, direction)
    gscore = pscore[g]
    if callback:
        callback(state)

    t_max = params.iterations
    for t in range(t_max):
        w = params.w_start - (params.w_start - params.w_end) * t / max(t_max - 1, 1)
        r1 = rng.random(x.shape)
        r2 = rng.random(x.shape)
        v = w * v + params.c1 * r1 * (pbest - x) + params.c2 * r2 * (state.gbest_pos - x)
        np.clip(v, -vmax, vmax, out=v)
        x = x + v
        clamped = (x < lo) | (x > hi)
        np.clip(x, lo, hi, out=x)
        v[clamped] = 0.0

        score = sign * np.asarray(f(x), dtype=float)
        better = score < pscore
        pbest[better] = x[better]
        pscore[better] = score[better]
        g = int(np.argmin(pscore))
        if pscore[g] < gscore:
            gscore = pscore[g]
            state.gbest_pos = pbest[g].copy()
            state.gbest_val = float(sign * gscore)

        state.positions, state.velocities = x, v
        state.pbest_val = sign * pscore
        state.iteration = t + 1
        if callback:
            callback(state)

    return state.gbest_pos.copy(), state.gbest_val
