"""Axisymmetric corneal height model.

Heights follow ``h(r) = (b/a) * (1 - I(sqrt(a) r) / I(sqrt(a)))`` on the unit
disk, where ``I`` is the modified fractional Bessel function of order
``alpha``. ``r`` is the physical radius divided by ``rim_radius``. During
fitting ``b`` carries the height unit (mm), so ``a`` and ``alpha`` stay
dimensionless.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_int, check_positive
from .specfun import DEFAULT_REL_TOL, FracOrder, as_order, i0_alpha_array

__all__ = ["CornealParams", "apex_height", "height", "height_profile"]


@dataclass(frozen=True)
class CornealParams:
    """Model parameters ``(a, b, alpha)`` plus the rim radius in mm."""

    a: float
    b: float
    alpha: FracOrder
    rim_radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "a", check_positive("a", self.a))
        object.__setattr__(self, "b", check_positive("b", self.b))
        object.__setattr__(self, "alpha", as_order(self.alpha))
        object.__setattr__(self, "rim_radius", check_positive("rim_radius", self.rim_radius))

    def as_tuple(self):
        return self.a, self.b, self.alpha.alpha


def height(params, r, rel_tol=DEFAULT_REL_TOL):
    """Model height at normalized radius ``r`` (scalar or array in [0, 1]).

    The rim value is exactly zero: ``sqrt(a) * 1`` reproduces the denominator
    argument, so the ratio is exactly one.
    """
    r_arr = np.asarray(r, dtype=float)
    if r_arr.size and (not np.all(np.isfinite(r_arr)) or r_arr.min() < 0.0 or r_arr.max() > 1.0):
        raise ValueError("r must lie in [0, 1]")
    root_a = np.sqrt(params.a)
    rim = i0_alpha_array(params.alpha, root_a, rel_tol)
    inner = i0_alpha_array(params.alpha, root_a * r_arr, rel_tol)
    h = (params.b / params.a) * (1.0 - inner / rim)
    return float(h) if np.ndim(h) == 0 else h


def apex_height(params, rel_tol=DEFAULT_REL_TOL):
    """Height at ``r = 0``."""
    return height(params, 0.0, rel_tol)


def height_profile(params, n_points):
    """Uniform profile ``(r, h)`` on [0, 1] with both endpoints.

    Returns an ``(n_points, 2)`` array.
    """
    n_points = check_int("n_points", n_points, 2)
    r = np.linspace(0.0, 1.0, n_points)
    return np.column_stack([r, height(params, r)])
