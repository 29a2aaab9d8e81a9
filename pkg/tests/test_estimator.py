import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from fracbessel import CornealParams, CornealSurfaceRegressor, RadialTransformer
from fracbessel.fitting import synthesize_grid

P = CornealParams(0.580404, 1.19734, 0.421345, rim_radius=6.0)


@pytest.fixture(scope="module")
def xyz():
    g = synthesize_grid(P, 41, 41, center=(0.5, -0.25))
    X, Y = np.meshgrid(g.x_coords, g.y_coords)
    keep = ~np.isnan(g.heights)
    return np.column_stack([X[keep], Y[keep]]), g.heights[keep]


def test_pipeline_recovers_params(xyz):
    XY, z = xyz
    pipe = make_pipeline(RadialTransformer(), CornealSurfaceRegressor()).fit(XY, z)
    reg = pipe[-1]
    assert reg.a_ == pytest.approx(P.a, rel=1e-3)
    assert reg.b_ == pytest.approx(P.b, rel=1e-3)
    assert reg.alpha_ == pytest.approx(P.alpha.alpha, rel=1e-3)
    assert pipe.score(XY, z) > 1 - 1e-10
    np.testing.assert_allclose(pipe.predict(XY), z, atol=1e-8)


def test_transformer_learns_center_and_rim(xyz):
    XY, _ = xyz
    t = RadialTransformer().fit(XY)
    assert t.center_ == pytest.approx([0.5, -0.25])
    assert t.rim_radius_ == pytest.approx(6.0, rel=1e-12)
    r = t.transform(XY)
    assert r.shape == (len(XY), 1) and r.max() <= 1.0


def test_transformer_fixed_params():
    XY = np.array([[0.0, 0.0], [3.0, 4.0], [10.0, 0.0]])
    t = RadialTransformer(center=(0.0, 0.0), rim_radius=5.0).fit(XY)
    np.testing.assert_allclose(t.transform(XY).ravel(), [0.0, 1.0, 1.0])
    t = RadialTransformer(center=(0.0, 0.0), rim_radius=5.0, clip=False).fit(XY)
    assert t.transform(XY)[2, 0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        RadialTransformer().fit(np.ones((3, 3)))


def test_get_params_and_clone():
    reg = CornealSurfaceRegressor(init=(1, 1, 0.5), ftol=1e-10)
    params = reg.get_params()
    assert params["init"] == (1, 1, 0.5) and params["ftol"] == 1e-10
    twin = clone(reg)
    assert twin.get_params() == params and twin is not reg


def test_regressor_input_checks():
    with pytest.raises(NotFittedError):
        CornealSurfaceRegressor().predict(np.array([[0.5]]))
    with pytest.raises(ValueError):
        CornealSurfaceRegressor().fit(np.array([[1.5], [0.2]]), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        CornealSurfaceRegressor().fit(np.ones((3, 2)) * 0.5, np.ones(3))
