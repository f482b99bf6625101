"""Shifted benchmark objectives and the budget-enforcing evaluator.

The evaluator is the only gateway to true fitness values. Everything else in
the package works on archived (point, value) pairs or on cheap surrogates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BudgetExhausted, ConfigError, OutOfBounds
from .sampling import STREAM_SHIFT, stream


class Kind(enum.Enum):
    SPHERE = "sphere"
    ROSENBROCK = "rosenbrock"
    ACKLEY = "ackley"
    GRIEWANK = "griewank"
    RASTRIGIN = "rastrigin"

    @classmethod
    def parse(cls, name: str | Kind) -> Kind:
        if isinstance(name, Kind):
            return name
        try:
            return cls(name.strip().lower())
        except ValueError:
            known = ", ".join(k.value for k in cls)
            raise ConfigError(f"unknown problem {name!r}; expected one of: {known}") from None


# Symmetric search boxes, half-width per coordinate.
HALF_WIDTH = {
    Kind.SPHERE: 100.0,
    Kind.ROSENBROCK: 2.048,
    Kind.ACKLEY: 32.768,
    Kind.GRIEWANK: 600.0,
    Kind.RASTRIGIN: 5.12,
}

# Shift vectors are drawn from this centered fraction of the box.
SHIFT_FRACTION = 0.8


def _sphere(z: np.ndarray) -> np.ndarray:
    return np.sum(z * z, axis=-1)


def _rosenbrock(z: np.ndarray) -> np.ndarray:
    # z is already offset by +1 so the valley floor sits at z = 1
    a = z[..., :-1]
    b = z[..., 1:]
    return np.sum(100.0 * (b - a * a) ** 2 + (a - 1.0) ** 2, axis=-1)


def _ackley(z: np.ndarray) -> np.ndarray:
    d = z.shape[-1]
    t1 = -20.0 * np.exp(-0.2 * np.sqrt(np.sum(z * z, axis=-1) / d))
    t2 = -np.exp(np.sum(np.cos(2.0 * np.pi * z), axis=-1) / d)
    return t1 + t2 + 20.0 + math.e


def _griewank(z: np.ndarray) -> np.ndarray:
    idx = np.sqrt(np.arange(1, z.shape[-1] + 1, dtype=float))
    return np.sum(z * z, axis=-1) / 4000.0 - np.prod(np.cos(z / idx), axis=-1) + 1.0


def _rastrigin(z: np.ndarray) -> np.ndarray:
    return np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z) + 10.0, axis=-1)


_OBJECTIVES = {
    Kind.SPHERE: _sphere,
    Kind.ROSENBROCK: _rosenbrock,
    Kind.ACKLEY: _ackley,
    Kind.GRIEWANK: _griewank,
    Kind.RASTRIGIN: _rastrigin,
}


def objective_value(kind: Kind | str, z) -> float | np.ndarray:
    """Evaluate the unshifted objective at ``z``.

    ``z`` is the shift-adjusted input (``x - shift``; Rosenbrock additionally
    expects the ``+1`` offset already applied). Accepts a single vector or a
    stack of row vectors.
    """
    z = np.asarray(z, dtype=float)
    out = _OBJECTIVES[Kind.parse(kind)](z)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class BenchmarkProblem:
    kind: Kind
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        for name in ("lower", "upper", "shift"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (self.dim,):
                raise ConfigError(f"{name} must have length {self.dim}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not np.all(self.lower < self.upper):
            raise ConfigError("lower must be strictly below upper")
        if not (np.all(self.shift > self.lower) and np.all(self.shift < self.upper)):
            raise ConfigError("shift must lie strictly inside the box")

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lower, self.upper

    @property
    def name(self) -> str:
        return self.kind.value

    def shifted(self, x: np.ndarray) -> np.ndarray:
        z = np.asarray(x, dtype=float) - self.shift
        if self.kind is Kind.ROSENBROCK:
            z = z + 1.0
        return z

    def __call__(self, x) -> float | np.ndarray:
        return objective_value(self.kind, self.shifted(x))


def make_problem(kind: Kind | str, dim: int, seed: int = 0) -> BenchmarkProblem:
    """Build a shifted benchmark with its standard box.

    The shift is a pure function of ``(kind, dim, seed)`` and is drawn
    uniformly from the inner 80% of the box.
    """
    kind = Kind.parse(kind)
    if dim < 1:
        raise ConfigError("dimension must be positive")
    if kind is Kind.ROSENBROCK and dim < 2:
        raise ConfigError("rosenbrock needs at least two dimensions")
    half = HALF_WIDTH[kind]
    lower = np.full(dim, -half)
    upper = np.full(dim, half)
    kind_index = list(Kind).index(kind)
    rng = stream(seed, STREAM_SHIFT, kind_index, dim)
    u = rng.random(dim)
    margin = 0.5 * (1.0 - SHIFT_FRACTION)
    shift = lower + (margin + SHIFT_FRACTION * u) * (upper - lower)
    return BenchmarkProblem(kind, dim, lower, upper, shift)


@dataclass
class BudgetedEvaluator:
    """Counts true evaluations and refuses to go past ``budget``."""

    problem: BenchmarkProblem
    budget: int | None = None
    spent: int = field(default=0)

    def __post_init__(self):
        if self.budget is None:
            self.budget = 5 * self.problem.dim
        if self.budget < 1:
            raise ConfigError("budget must be positive")

    @property
    def remaining(self) -> int:
        return self.budget - self.spent

    def evaluate(self, x) -> float:
        if self.spent >= self.budget:
            raise BudgetExhausted(f"all {self.budget} evaluations already spent")
        x = np.asarray(x, dtype=float)
        lo, hi = self.problem.bounds
        if x.shape != (self.problem.dim,) or np.any(x < lo) or np.any(x > hi):
            raise OutOfBounds("point outside the search box")
        value = float(self.problem(x))
        self.spent += 1
        return value
