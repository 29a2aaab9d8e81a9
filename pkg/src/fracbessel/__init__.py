"""Modified fractional Bessel function I0^alpha and a corneal height model built on it."""

from .cornea import CornealParams, apex_height, height, height_profile
from .estimator import CornealSurfaceRegressor, RadialTransformer
from .fitting import FitReport, RadialSamples, SurfaceGrid, fit, fit_grid, radial_reduce, residual_map
from .specfun import FracOrder, SeriesEval, coeff_table, f_mu, gamma, i0_alpha, i0_alpha_array, i0_alpha_asym
from .volterra import oracle_report, solve_volterra

__version__ = "0.1.0"

__all__ = [
    "CornealParams",
    "CornealSurfaceRegressor",
    "FitReport",
    "FracOrder",
    "RadialSamples",
    "RadialTransformer",
    "SeriesEval",
    "SurfaceGrid",
    "apex_height",
    "coeff_table",
    "f_mu",
    "fit",
    "fit_grid",
    "gamma",
    "height",
    "height_profile",
    "i0_alpha",
    "i0_alpha_array",
    "i0_alpha_asym",
    "oracle_report",
    "radial_reduce",
    "residual_map",
    "solve_volterra",
]
