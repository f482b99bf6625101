"""Seeded random streams, Latin hypercube designs and uniform batches.

Every random number in a run comes from a :class:`numpy.random.Generator`
backed by PCG64 and seeded through a :class:`numpy.random.SeedSequence` built
from ``[master_seed, offset, *extra]``. Each consumer gets its own offset, so
turning one consumer off (e.g. local search in the ablation) leaves the
others' streams untouched.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .kernels import scale_unit

STREAM_INIT = 0
STREAM_PSO = 1
STREAM_MC = 2
STREAM_SHIFT = 3
STREAM_BASELINE = 4

Bounds = tuple[np.ndarray, np.ndarray]


def stream(master_seed: int, offset: int, *extra: int) -> np.random.Generator:
    """Return the PCG64 generator for sub-stream ``offset`` of ``master_seed``."""
    if master_seed < 0:
        raise ValueError("seed must be a non-negative integer")
    seq = np.random.SeedSequence([int(master_seed), int(offset), *map(int, extra)])
    return np.random.Generator(np.random.PCG64(seq))


def _as_bounds(bounds) -> Bounds:
    lo, hi = bounds
    return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)


def lhs(n: int, bounds, rng: np.random.Generator) -> np.ndarray:
    """Random Latin hypercube design of ``n`` points.

    Along every axis the box is cut into ``n`` equal strata and each stratum
    receives exactly one point, placed uniformly inside it.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    lo, hi = _as_bounds(bounds)
    d = lo.shape[0]
    unit = np.empty((n, d))
    for j in range(d):
        perm = rng.permutation(n)
        unit[:, j] = (perm + rng.random(n)) / n
    pts = lo + unit * (hi - lo)
    # guard the upper face against round-off
    return np.minimum(pts, hi)


def uniform_batch(m: int, bounds, rng: np.random.Generator) -> np.ndarray:
    """``m`` i.i.d. uniform points in the box, shape ``(m, D)``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    lo, hi = _as_bounds(bounds)
    return np.minimum(lo + rng.random((m, lo.shape[0])) * (hi - lo), hi)


def uniform_chunks(
    m: int, bounds, rng: np.random.Generator, chunk: int = 16384
) -> Iterator[np.ndarray]:
    """Yield ``uniform_batch(m, ...)`` in row blocks without materializing it.

    PCG64 doubles are drawn sequentially in C order, so concatenating the
    chunks reproduces ``uniform_batch(m, bounds, rng)`` exactly.
    """
    lo, hi = _as_bounds(bounds)
    width = hi - lo
    buf = np.empty((min(chunk, m), lo.shape[0]))
    done = 0
    while done < m:
        rows = min(chunk, m - done)
        block = buf[:rows]
        rng.random(out=block)
        scale_unit(block, lo, width, hi)
        yield block
        done += rows
