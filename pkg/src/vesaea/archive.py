"""The archive of truly evaluated points."""

from __future__ import annotations

import enum

import numpy as np

DUPLICATE_TOL = 1e-8


class Origin(enum.Enum):
    INIT = "init"
    GLOBAL_LOOCV = "global_loocv"
    GLOBAL_SURROGATE = "global_surrogate"
    LOCAL = "local"
    RANDOM = "random"

    @property
    def is_global(self) -> bool:
        return self in (Origin.GLOBAL_LOOCV, Origin.GLOBAL_SURROGATE)


class Archive:
    """Append-only store of ``(point, value, origin)`` triples.

    Points are kept in insertion order; ``best_index`` tracks the first entry
    holding the minimal value.
    """

    def __init__(self, bounds, capacity: int = 64):
        lo, hi = bounds
        self.lower = np.asarray(lo, dtype=float)
        self.upper = np.asarray(hi, dtype=float)
        self.dim = self.lower.shape[0]
        self._x = np.empty((capacity, self.dim))
        self._y = np.empty(capacity)
        self.origins: list[Origin] = []
        self.best_index = -1

    def __len__(self) -> int:
        return len(self.origins)

    @property
    def bounds(self):
        return self.lower, self.upper

    @property
    def points(self) -> np.ndarray:
        view = self._x[: len(self)]
        view.flags.writeable = False
        return view

    @property
    def values(self) -> np.ndarray:
        view = self._y[: len(self)]
        view.flags.writeable = False
        return view

    @property
    def best_value(self) -> float:
        return float(self._y[self.best_index]) if len(self) else np.inf

    @property
    def best_point(self) -> np.ndarray:
        return self._x[self.best_index].copy()

    def normalized_distance(self, x) -> np.ndarray:
        u = (np.asarray(x, dtype=float) - self.lower) / (self.upper - self.lower)
        ua = (self.points - self.lower) / (self.upper - self.lower)
        return np.sqrt(np.sum((ua - u) ** 2, axis=1))

    def is_duplicate(self, x, tol: float = DUPLICATE_TOL) -> bool:
        return len(self) > 0 and bool(self.normalized_distance(x).min() < tol)

    def add(self, x, y: float, origin: Origin) -> int:
        n = len(self)
        if n == self._x.shape[0]:
            self._x = np.concatenate([self._x, np.empty_like(self._x)])
            self._y = np.concatenate([self._y, np.empty_like(self._y)])
        self._x[n] = x
        self._y[n] = y
        self.origins.append(origin)
        if self.best_index < 0 or y < self._y[self.best_index]:
            self.best_index = n
        return n
