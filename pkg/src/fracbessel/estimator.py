"""scikit-learn wrappers around the corneal height model.

``RadialTransformer`` maps planar points ``(x, y)`` in mm to normalized radii,
and ``CornealSurfaceRegressor`` fits ``(a, b, alpha)`` on those radii. They
chain in a :class:`sklearn.pipeline.Pipeline`::

    make_pipeline(RadialTransformer(), CornealSurfaceRegressor()).fit(XY, z)
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .cornea import CornealParams, height
from .fitting import DEFAULT_BOUNDS, RadialSamples, fit

__all__ = ["CornealSurfaceRegressor", "RadialTransformer"]


class RadialTransformer(TransformerMixin, BaseEstimator):
    """Planar coordinates to radius over rim radius.

    Parameters
    ----------
    center : tuple of float, optional
        Surface center in mm. Learned as the midpoint of the data extent
        when omitted.
    rim_radius : float, optional
        Rim radius in mm. Learned as the largest distance from the center
        when omitted.
    clip : bool, default=True
        Clip transformed radii to [0, 1].
    """

    def __init__(self, center=None, rim_radius=None, clip=True):
        self.center = center
        self.rim_radius = rim_radius
        self.clip = clip

    def fit(self, X, y=None):
        X = validate_data(self, X, ensure_min_features=2)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (x_mm, y_mm), got {X.shape[1]}")
        if self.center is None:
            self.center_ = 0.5 * (X.min(axis=0) + X.max(axis=0))
        else:
            self.center_ = np.asarray(self.center, dtype=float)
        if self.rim_radius is None:
            self.rim_radius_ = float(np.hypot(*(X - self.center_).T).max())
        else:
            self.rim_radius_ = float(self.rim_radius)
        if not self.rim_radius_ > 0:
            raise ValueError("rim radius must be positive")
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = validate_data(self, X, reset=False)
        r = np.hypot(*(X - self.center_).T) / self.rim_radius_
        if self.clip:
            r = np.clip(r, 0.0, 1.0)
        return r.reshape(-1, 1)


class CornealSurfaceRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of the fractional Bessel corneal model.

    ``X`` holds one column of normalized radii in [0, 1] and ``y`` the
    heights. After ``fit`` the estimator exposes ``a_``, ``b_``, ``alpha_``,
    ``params_`` and the full ``report_``.

    Parameters
    ----------
    init : tuple of float, optional
        Extra ``(a, b, alpha)`` start for the optimizer.
    bounds : sequence of (low, high), optional
        Parameter box; defaults to :data:`fracbessel.fitting.DEFAULT_BOUNDS`.
    ftol, xtol : float
        Optimizer tolerances, see :func:`fracbessel.fitting.fit`.
    max_evals : int
        Evaluation cap per optimizer run.
    rim_radius : float
        Recorded in ``params_`` for reference.
    """

    def __init__(self, init=None, bounds=None, ftol=1e-12, xtol=1e-8, max_evals=20_000, rim_radius=1.0):
        self.init = init
        self.bounds = bounds
        self.ftol = ftol
        self.xtol = xtol
        self.max_evals = max_evals
        self.rim_radius = rim_radius

    def _radii(self, X, reset):
        X = validate_data(self, X, reset=reset)
        if X.shape[1] != 1:
            raise ValueError(f"expected a single radius column, got {X.shape[1]} columns")
        r = X[:, 0]
        if r.min() < 0.0 or r.max() > 1.0:
            raise ValueError("radii must lie in [0, 1]")
        return r

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True)
        r = self._radii(X, reset=False)
        report = fit(
            RadialSamples(r, y),
            init=self.init,
            bounds=DEFAULT_BOUNDS if self.bounds is None else self.bounds,
            ftol=self.ftol,
            xtol=self.xtol,
            max_evals=self.max_evals,
            rim_radius=self.rim_radius,
        )
        self.report_ = report
        self.params_ = report.params
        self.a_, self.b_, self.alpha_ = report.params.as_tuple()
        return self

    def predict(self, X):
        check_is_fitted(self)
        r = self._radii(X, reset=False)
        return height(CornealParams(self.a_, self.b_, self.alpha_), r)
