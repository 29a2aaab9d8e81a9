import math

import numpy as np
import pytest

from fracbessel import fitting
from fracbessel.cornea import CornealParams, height
from fracbessel.fitting import (
    DEFAULT_STARTS,
    MIN_POINTS,
    PENALTY,
    RadialSamples,
    SurfaceGrid,
    fit,
    fit_grid,
    objective,
    orient_samples,
    radial_reduce,
    residual_map,
    synthesize_grid,
)

EXTERIOR = CornealParams(0.580404, 1.19734, 0.421345)


def rel_err(got, want):
    return max(abs(g / w - 1) for g, w in zip(got.as_tuple(), want.as_tuple()))


@pytest.fixture
def few_points(monkeypatch):
    """Lift the minimum point count so hand-sized grids are accepted."""
    monkeypatch.setattr(fitting, "MIN_POINTS", 1)


def tiny_grid(z, center=(0.0, 0.0), rim=1.0):
    z = np.atleast_2d(np.asarray(z, dtype=float))
    ny, nx = z.shape
    x = np.arange(nx, dtype=float) - (nx - 1) / 2
    y = np.arange(ny, dtype=float) - (ny - 1) / 2
    return SurfaceGrid(x, y, z, center=center, rim_radius=rim)


@pytest.fixture(scope="module")
def exterior_grid():
    return synthesize_grid(EXTERIOR, 61, 61)


# ---------- grid and reduction ----------


def test_grid_needs_min_points():
    assert MIN_POINTS == 100
    x = np.linspace(-1, 1, 5)
    with pytest.raises(ValueError):
        SurfaceGrid(x, x, np.zeros((5, 5)))


def test_grid_invariants(few_points):
    x = np.linspace(-1, 1, 5)
    with pytest.raises(ValueError):
        SurfaceGrid(x, x, np.full((5, 5), np.inf))
    with pytest.raises(ValueError):
        SurfaceGrid(x, x, np.zeros((4, 5)))
    with pytest.raises(ValueError):
        SurfaceGrid(x, x, np.zeros((5, 5)), rim_radius=-1.0)


def test_single_center_point(few_points):
    s = radial_reduce(tiny_grid([[3.0]]))
    assert list(s.r) == [0.0] and list(s.h) == [3.0]


def test_rim_point_retained(few_points):
    z = np.full((1, 3), np.nan)
    z[0, 2] = 0.0
    g = tiny_grid(z, center=(0.0, 0.0), rim=1.0)
    s = radial_reduce(g)
    assert list(s.r) == [1.0]


def test_outside_points_dropped_and_all_missing_error(few_points):
    g = tiny_grid([[1.0, 2.0, 3.0]], rim=0.5)
    assert list(radial_reduce(g).h) == [2.0]
    z = np.full((3, 3), np.nan)
    with pytest.raises(ValueError):
        SurfaceGrid(np.arange(3.0), np.arange(3.0), z)


def test_disk_fraction():
    g = synthesize_grid(EXTERIOR, 123, 123)
    frac = len(radial_reduce(g)) / (123 * 123)
    assert frac == pytest.approx(math.pi / 4, rel=2e-2)


def test_default_center_and_rim():
    g = synthesize_grid(CornealParams(1.0, 1.0, 0.5, rim_radius=6.0), 41, 41, center=(1.0, -2.0))
    bare = SurfaceGrid(g.x_coords, g.y_coords, g.heights)
    assert bare.center == pytest.approx((1.0, -2.0))
    assert bare.rim_radius == pytest.approx(6.0, rel=1e-12)


def test_samples_canonical_order():
    s = RadialSamples([0.5, 0.1, 0.5], [2.0, 1.0, 1.0])
    assert list(s.r) == [0.1, 0.5, 0.5]
    assert list(s.h) == [1.0, 1.0, 2.0]
    with pytest.raises(ValueError):
        RadialSamples([], [])
    with pytest.raises(ValueError):
        RadialSamples([1.5], [0.0])


# ---------- objective ----------


def test_objective_zero_and_outlier(exterior_grid):
    s = radial_reduce(exterior_grid)
    assert objective(EXTERIOR, s) <= 1e-20
    h = s.h.copy()
    h[17] += 1.0
    assert objective(EXTERIOR, RadialSamples(s.r, h)) == pytest.approx(1.0, rel=1e-12)


def test_objective_noise_chi_square():
    g = synthesize_grid(EXTERIOR, 123, 123, noise_sigma=0.01, seed=3)
    s = radial_reduce(g)
    assert objective(EXTERIOR, s) / len(s) == pytest.approx(1e-4, rel=0.2)


def test_objective_penalty_outside_bounds(exterior_grid):
    s = radial_reduce(exterior_grid)
    bounds = ((0.1, 0.5), (0.1, 5.0), (0.0, 1.0))
    assert objective(EXTERIOR, s, bounds) >= PENALTY


def test_objective_permutation_invariant(exterior_grid):
    s = radial_reduce(synthesize_grid(EXTERIOR, 61, 61, noise_sigma=0.02, seed=1))
    perm = np.random.default_rng(0).permutation(len(s))
    shuffled = RadialSamples(s.r[perm], s.h[perm])
    p = CornealParams(0.7, 1.1, 0.5)
    assert objective(p, shuffled) == objective(p, s)


# ---------- fit ----------


def test_round_trip_exterior(exterior_grid):
    rep = fit_grid(exterior_grid)
    assert rel_err(rep.params, EXTERIOR) < 1e-3
    assert rep.mae <= 1e-6
    assert rep.converged
    assert len(rep.starts) == len(DEFAULT_STARTS)


@pytest.mark.parametrize(
    "truth",
    [(0.2, 0.5, 0.1), (2.0, 3.0, 1.0), (1.1, 0.9, 0.7), (0.4, 2.2, 0.35)],
)
def test_round_trip_box(truth):
    p = CornealParams(*truth)
    rep = fit_grid(synthesize_grid(p, 41, 41))
    assert rel_err(rep.params, p) < 1e-3


def test_report_statistics_consistent(exterior_grid):
    g = synthesize_grid(EXTERIOR, 61, 61, noise_sigma=0.01, seed=5)
    rep = fit_grid(g)
    used = rep.residual_grid[~np.isnan(rep.residual_grid)]
    assert rep.mae == pytest.approx(used.mean(), rel=1e-12, abs=1e-12)
    assert rep.mae <= rep.max_abs and rep.rmse <= rep.max_abs
    assert rep.n_points_used == used.size
    np.testing.assert_array_equal(np.isnan(rep.residual_grid), np.isnan(g.heights))
    np.testing.assert_allclose(residual_map(g, rep.params), rep.residual_grid, rtol=0, atol=1e-15)


@pytest.mark.parametrize("scale", [0.5, 2.0])
def test_scale_covariance(scale):
    g = synthesize_grid(EXTERIOR, 61, 61, noise_sigma=0.01, seed=2)
    base = fit_grid(g)
    scaled_grid = SurfaceGrid(g.x_coords, g.y_coords, scale * g.heights, g.center, g.rim_radius)
    scaled = fit_grid(scaled_grid)
    a0, b0, al0 = base.params.as_tuple()
    a1, b1, al1 = scaled.params.as_tuple()
    assert a1 == pytest.approx(a0, rel=1e-4)
    assert al1 == pytest.approx(al0, rel=1e-4, abs=1e-6)
    assert b1 == pytest.approx(scale * b0, rel=1e-4)


def test_fit_with_init_and_bounds(exterior_grid):
    s = radial_reduce(exterior_grid)
    rep = fit(s, init=(0.6, 1.0, 0.4), bounds=((0.1, 3.0), (0.1, 5.0), (0.1, 0.9)))
    assert rel_err(rep.params, EXTERIOR) < 1e-3
    assert rep.starts[0]["start"] == (0.6, 1.0, 0.4)
    assert rep.residual_grid is not None


def test_fit_flags_nonconvergence(exterior_grid):
    rep = fit(radial_reduce(exterior_grid), max_evals=10)
    assert not rep.converged


def test_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        fit(([], []))
    s = RadialSamples(np.linspace(0, 1, 10), np.linspace(1, 0, 10))
    with pytest.raises(ValueError):
        fit(s, bounds=((1.0, 0.5), (0.1, 1.0), (0.0, 1.0)))
    with pytest.raises(ValueError):
        fit(s, bounds=((0.1, 1.0), (0.1, 1.0), (0.0, 1.5)))


# ---------- residual map and orientation ----------


def test_residual_map_examples(exterior_grid):
    perfect = residual_map(exterior_grid, EXTERIOR)
    assert np.nanmax(perfect) <= 1e-15
    z = exterior_grid.heights.copy()
    z[30, 30] += 0.05
    g = SurfaceGrid(exterior_grid.x_coords, exterior_grid.y_coords, z, exterior_grid.center, exterior_grid.rim_radius)
    m = residual_map(g, EXTERIOR)
    assert m[30, 30] == pytest.approx(0.05, rel=1e-12)
    m[30, 30] = 0.0
    assert np.nanmax(m) <= 1e-15


def test_residual_map_noise_mean():
    g = synthesize_grid(EXTERIOR, 123, 123, noise_sigma=0.01, seed=11)
    assert np.nanmean(residual_map(g, EXTERIOR)) == pytest.approx(0.01 * math.sqrt(2 / math.pi), rel=0.3)


def test_orient_flips_and_shifts():
    r = np.linspace(0, 1, 200)
    h = -(height(EXTERIOR, r)) + 5.0
    s = orient_samples(RadialSamples(r, h))
    assert s.h[np.argmin(s.r)] > 0
    assert abs(s.h[s.r >= 0.98].mean()) < 1e-12


def test_synthesize_deterministic():
    a = synthesize_grid(EXTERIOR, 31, 31, noise_sigma=0.01, seed=4)
    b = synthesize_grid(EXTERIOR, 31, 31, noise_sigma=0.01, seed=4)
    np.testing.assert_array_equal(a.heights, b.heights)
    assert np.isnan(a.heights[0, 0])
