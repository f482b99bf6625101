import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.interpolate import RBFInterpolator

from vesaea.exceptions import DegenerateDesign, TooFewPoints
from vesaea.surrogate import fit, fit_loocv_model, loocv_errors, normalize, tps

UNIT1 = (np.array([0.0]), np.array([1.0]))


def random_instance(seed, d_max=10, n_max=60, extra=2):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, d_max + 1))
    n = int(rng.integers(d + extra, n_max + 1))
    lo = rng.uniform(-50, 10, d)
    hi = lo + rng.uniform(0.1, 100, d)
    x = rng.uniform(lo, hi, (n, d))
    u = (x - lo) / (hi - lo)
    y = 10 * np.sum((u - 0.4) ** 2, axis=1) + np.cos(5 * u[:, 0]) + rng.normal(size=n)
    return x, y, (lo, hi)


def reference_tps(x, y, bounds):
    """Second implementation: explicit kernel loop and a plain dense solve."""
    lo, hi = bounds
    u = (x - lo) / (hi - lo)
    n, d = u.shape
    k = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            r = np.sqrt(np.sum((u[i] - u[j]) ** 2))
            k[i, j] = r * r * np.log(r) if r > 0 else 0.0
    p = np.hstack([np.ones((n, 1)), u])
    a = np.block([[k, p], [p.T, np.zeros((d + 1, d + 1))]])
    coef = np.linalg.solve(a, np.concatenate([y, np.zeros(d + 1)]))
    lam, b = coef[:n], coef[n:]

    def predict(xq):
        uq = (xq - lo) / (hi - lo)
        r = np.sqrt(np.sum((uq - u) ** 2, axis=1))
        phi = np.where(r > 0, r * r * np.log(np.where(r > 0, r, 1.0)), 0.0)
        return phi @ lam + b[0] + b[1:] @ uq

    return predict


def test_tps_kernel():
    assert tps(np.array([0.0]))[0] == 0.0
    assert tps(np.array([1.0]))[0] == 0.0
    assert tps(np.array([np.e]))[0] == pytest.approx(np.e**2)


def test_zero_data():
    m = fit([[0.0], [0.5], [1.0]], [0.0, 0.0, 0.0], UNIT1)
    assert np.all(m.weights == 0) and np.all(m.poly == 0)
    assert m.predict(np.array([0.3])) == 0.0


def test_affine_1d():
    m = fit([[0.0], [0.5], [1.0]], [1.0, 2.0, 3.0], UNIT1)
    assert np.allclose(m.weights, 0.0, atol=1e-12)
    assert m.predict(np.array([0.25])) == pytest.approx(1.5, abs=1e-12)


def test_interpolates_sphere_d2():
    rng = np.random.default_rng(3)
    x = rng.uniform(-5, 5, (10, 2))
    y = np.sum(x**2, axis=1)
    m = fit(x, y, ([-5.0] * 2, [5.0] * 2))
    assert m.ridge == 0.0
    assert np.max(np.abs(m.predict(x) - y)) <= 1e-8 * (1 + np.abs(y)).max()


@pytest.mark.parametrize("seed", range(100))
def test_interpolation_residual(seed):
    x, y, b = random_instance(seed)
    m = fit(x, y, b)
    assert m.ridge == 0.0
    assert np.max(np.abs(m.predict(x) - y) / (1 + np.abs(y))) <= 1e-8


@pytest.mark.parametrize("seed", range(20))
def test_side_conditions(seed):
    x, y, b = random_instance(seed)
    m = fit(x, y, b)
    assert abs(m.weights.sum()) <= 1e-8 * max(1.0, np.abs(m.weights).max())
    assert np.all(np.abs(m.weights @ m.centers) <= 1e-8 * max(1.0, np.abs(m.weights).max()))


@pytest.mark.parametrize("seed", range(10))
def test_affine_reproduction(seed):
    rng = np.random.default_rng(100 + seed)
    d = int(rng.integers(1, 8))
    lo, hi = -rng.uniform(1, 10, d), rng.uniform(1, 10, d)
    coef, c0 = rng.normal(size=d), rng.normal()
    x = rng.uniform(lo, hi, (d + 2 + int(rng.integers(0, 20)), d))
    m = fit(x, x @ coef + c0, (lo, hi))
    xt = rng.uniform(lo, hi, (100, d))
    assert np.max(np.abs(m.predict(xt) - (xt @ coef + c0))) <= 1e-8


def test_rosenbrock_held_out_matches_reference():
    rng = np.random.default_rng(12)
    lo, hi = np.full(2, -2.048), np.full(2, 2.048)
    x = rng.uniform(lo, hi, (12, 2))
    y = 100 * (x[:, 1] - x[:, 0] ** 2) ** 2 + (x[:, 0] - 1) ** 2
    m = fit(x, y, (lo, hi))
    ref = reference_tps(x, y, (lo, hi))
    for xq in rng.uniform(lo, hi, (20, 2)):
        assert m.predict(xq) == pytest.approx(ref(xq), abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), power=st.integers(-10, 12), offset=st.floats(-100, 100))
def test_scale_robustness(seed, power, offset):
    # power-of-two scales are exact; the offset adds ordinary round-off only
    scale = 2.0**power
    x, y, (lo, hi) = random_instance(seed, d_max=4, n_max=20)
    xt = np.random.default_rng(seed).uniform(lo, hi, (10, lo.shape[0]))
    m1 = fit(x, y, (lo, hi))
    m2 = fit(x * scale + offset, y, (lo * scale + offset, hi * scale + offset))
    assert np.allclose(m1.predict(xt), m2.predict(xt * scale + offset), rtol=0, atol=1e-9 * (1 + np.abs(y).max()))


@pytest.mark.parametrize("seed", range(25))
def test_loocv_matches_independent_refits(seed):
    x, y, b = random_instance(1000 + seed, d_max=6, n_max=40, extra=3)
    u = normalize(x, b)
    got = loocv_errors(x, y, b)
    expect = np.empty(len(y))
    for i in range(len(y)):
        keep = np.arange(len(y)) != i
        oracle = RBFInterpolator(u[keep], y[keep], kernel="thin_plate_spline", degree=1)
        expect[i] = abs(y[i] - oracle(u[i:i + 1])[0])
    assert np.all(got >= 0)
    np.testing.assert_allclose(got, expect, rtol=0, atol=1e-10)


def test_loocv_affine_is_zero():
    x = np.array([[0.0], [0.2], [0.5], [0.7], [1.0]])
    assert np.all(loocv_errors(x, 3 * x[:, 0] - 1, UNIT1) <= 1e-9)


def test_loocv_nonnegative_d2():
    rng = np.random.default_rng(8)
    x = rng.uniform(0, 1, (10, 2))
    assert np.all(loocv_errors(x, rng.normal(size=10), ([0.0] * 2, [1.0] * 2)) >= 0)


def test_loocv_model_zero_errors():
    m = fit_loocv_model([[0.0], [0.4], [1.0]], np.zeros(3), UNIT1)
    assert np.all(m.predict(np.linspace(0, 1, 11)[:, None]) == 0.0)


def test_loocv_model_interpolates():
    rng = np.random.default_rng(2)
    x = rng.uniform(0, 1, (15, 3))
    e = loocv_errors(x, np.sin(4 * x).sum(axis=1), ([0.0] * 3, [1.0] * 3))
    m = fit_loocv_model(x, e, ([0.0] * 3, [1.0] * 3))
    assert np.max(np.abs(m.predict(x) - e)) <= 1e-8 * (1 + e.max())


def test_loocv_model_peaks_between_sites():
    x = np.array([[0.0], [0.2], [0.4], [0.6], [0.8], [1.0]])
    e = np.array([0.0, 0.1, 1.0, 1.2, 0.1, 0.0])
    m = fit_loocv_model(x, e, UNIT1)
    grid = np.linspace(0, 1, 20001)
    best = grid[np.argmax(m.predict(grid[:, None]))]
    assert 0.4 < best < 0.6
    assert np.min(np.abs(best - x[:, 0])) > 1e-3


def test_too_few_points():
    with pytest.raises(TooFewPoints):
        fit([[0.0, 0.0], [1.0, 1.0], [0.5, 0.2]], [1, 2, 3], ([0.0] * 2, [1.0] * 2))
    with pytest.raises(TooFewPoints):
        loocv_errors([[0.0], [0.5], [1.0]], [1, 2, 3], UNIT1)


def test_duplicates_rejected():
    with pytest.raises(DegenerateDesign):
        fit([[0.0], [0.5], [0.5], [1.0]], [1, 2, 2, 3], UNIT1)


def test_collinear_design_uses_ridge_or_fails_cleanly():
    # points on a line in 2-D leave the linear tail rank deficient
    t = np.linspace(0, 1, 6)
    x = np.column_stack([t, t])
    try:
        m = fit(x, t**2, ([0.0] * 2, [1.0] * 2))
    except DegenerateDesign:
        return
    assert m.ridge > 0


def test_predict_shapes():
    m = fit([[0.0], [0.5], [1.0]], [1.0, 0.0, 1.0], UNIT1)
    assert isinstance(m.predict(np.array([0.2])), float)
    assert m.predict(np.array([[0.2], [0.3]])).shape == (2,)
