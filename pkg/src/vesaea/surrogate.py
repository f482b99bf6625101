"""Thin-plate-spline RBF interpolation and leave-one-out error estimation.

The interpolant lives in normalized coordinates ``u = (x - lower) / (upper - lower)``::

    s(u) = sum_i w_i * phi(|u - u_i|) + b0 + b . u,    phi(r) = r^2 log r,

and its coefficients solve the saddle-point system

    [ Phi  P ] [w]   [y]
    [ P^T  0 ] [b] = [0],    P_i = (1, u_i).

The linear tail makes the system solvable for any unisolvent design and lets
the model reproduce affine data exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist, pdist

from .exceptions import DegenerateDesign, TooFewPoints
from .kernels import tps_eval

RIDGES = (1e-10, 1e-8, 1e-6)
RCOND_MIN = 1e-14
MIN_SEPARATION = 1e-10


def tps(r: np.ndarray) -> np.ndarray:
    """phi(r) = r^2 ln r, continued by phi(0) = 0."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(r > 0.0, r * r * np.log(r), 0.0)


def normalize(x, bounds) -> np.ndarray:
    lo, hi = bounds
    return (np.asarray(x, dtype=float) - lo) / (np.asarray(hi) - lo)


@dataclass(frozen=True, eq=False)
class RbfModel:
    centers: np.ndarray
    weights: np.ndarray
    poly: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    ridge: float = 0.0

    @property
    def bounds(self):
        return self.lower, self.upper

    def predict_normalized(self, u: np.ndarray) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return tps_eval(u, self.centers, self.weights, self.poly)

    def predict(self, x):
        """Model value at one point (returns a float) or at rows of a 2-D array."""
        x = np.asarray(x, dtype=float)
        vals = self.predict_normalized(normalize(np.atleast_2d(x), self.bounds))
        return float(vals[0]) if x.ndim == 1 else vals

    __call__ = predict


def _solve_saddle(u: np.ndarray, y: np.ndarray, ridge: float):
    n, d = u.shape
    a = np.zeros((n + d + 1, n + d + 1))
    a[:n, :n] = tps(cdist(u, u))
    if ridge:
        a[np.arange(n), np.arange(n)] += ridge
    a[:n, n] = 1.0
    a[:n, n + 1:] = u
    a[n, :n] = 1.0
    a[n + 1:, :n] = u.T
    rhs = np.zeros(n + d + 1)
    rhs[:n] = y

    anorm = np.linalg.norm(a, 1)
    try:
        with warnings.catch_warnings():
            # a singular system is expected here and handled by the ridge retries
            warnings.simplefilter("ignore", linalg.LinAlgWarning)
            lu, piv = linalg.lu_factor(a, check_finite=False)
    except (linalg.LinAlgError, ValueError):
        return None
    diag = np.abs(np.diag(lu))
    if not np.all(np.isfinite(diag)) or diag.min() == 0.0:
        return None
    rcond, info = linalg.lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or not rcond >= RCOND_MIN:
        return None
    sol = linalg.lu_solve((lu, piv), rhs, check_finite=False)
    if not np.all(np.isfinite(sol)):
        return None
    return sol[:n], sol[n:]


def fit(points, values, bounds) -> RbfModel:
    """Fit a TPS interpolant to ``(points, values)`` inside ``bounds``.

    A singular or badly conditioned system (reciprocal condition estimate
    below 1e-14, or a zero pivot) is retried with a small ridge on the kernel
    diagonal; the ridge actually used is stored on the model.

    :raises TooFewPoints: fewer than ``D + 2`` points.
    :raises DegenerateDesign: near-duplicate points, or every retry failed.
    """
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    x = np.atleast_2d(np.asarray(points, dtype=float))
    y = np.asarray(values, dtype=float).ravel()
    n, d = x.shape
    if y.shape[0] != n:
        raise ValueError("points and values have different lengths")
    if n < d + 2:
        raise TooFewPoints(f"need at least {d + 2} points in {d} dimensions, got {n}")
    u = normalize(x, (lo, hi))
    if n > 1 and pdist(u).min() <= MIN_SEPARATION:
        raise DegenerateDesign("training points closer than 1e-10 in normalized coordinates")

    for ridge in (0.0, *RIDGES):
        sol = _solve_saddle(u, y, ridge)
        if sol is not None:
            w, b = sol
            return RbfModel(u, w, b, lo, hi, ridge)
    raise DegenerateDesign("RBF system singular even with ridge 1e-6")


def loocv_errors(points, values, bounds) -> np.ndarray:
    """Absolute leave-one-out errors ``|y_i - s_{-i}(x_i)|``.

    Every entry comes from a genuine refit on the other ``N - 1`` pairs.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    y = np.asarray(values, dtype=float).ravel()
    n, d = x.shape
    if n < d + 3:
        raise TooFewPoints(f"LOOCV needs at least {d + 3} points in {d} dimensions, got {n}")
    errors = np.empty(n)
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        keep[i] = False
        sub = fit(x[keep], y[keep], bounds)
        errors[i] = abs(y[i] - sub.predict(x[i]))
        keep[i] = True
    return errors


def fit_loocv_model(points, errors, bounds) -> RbfModel:
    """Interpolant of the leave-one-out errors over the design."""
    return fit(points, errors, bounds)
