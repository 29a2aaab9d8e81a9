"""Least-squares recovery of ``(a, b, alpha)`` from gridded surface heights.

Gridded heights are reduced to radial samples ``(r, h)``. Every in-rim,
non-missing cell becomes one sample; there is no binning. The model is then
fitted by Nelder-Mead on the sum of squared residuals. Bounds are enforced
by a finite penalty, so the optimizer never sees an exception.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ._validation import NonConvergenceError, check_int, check_nonnegative, check_positive
from .cornea import CornealParams, height

__all__ = [
    "DEFAULT_BOUNDS",
    "DEFAULT_STARTS",
    "FitReport",
    "RadialSamples",
    "SurfaceGrid",
    "fit",
    "fit_grid",
    "objective",
    "orient_samples",
    "radial_reduce",
    "residual_map",
    "synthesize_grid",
]

MIN_POINTS = 100
PENALTY = 1e20
DEFAULT_BOUNDS = ((1e-6, 50.0), (1e-9, 1e4), (0.0, 1.0))
DEFAULT_STARTS = ((0.5, 1.0, 0.5), (1.0, 1.5, 0.8), (0.3, 0.8, 0.3))
# Samples within this relative distance beyond the rim still count as r = 1.
_RIM_SLACK = 1e-12


@dataclass(frozen=True)
class SurfaceGrid:
    """Heights in mm on a rectilinear grid; ``nan`` marks missing cells.

    ``heights[j, i]`` is the height at ``(x_coords[i], y_coords[j])``.
    ``center`` defaults to the middle of the coordinate extent and
    ``rim_radius`` to the largest radius that carries data.
    """

    x_coords: np.ndarray
    y_coords: np.ndarray
    heights: np.ndarray
    center: tuple = None
    rim_radius: float = None

    def __post_init__(self):
        x = np.asarray(self.x_coords, dtype=float)
        y = np.asarray(self.y_coords, dtype=float)
        z = np.asarray(self.heights, dtype=float)
        if x.ndim != 1 or y.ndim != 1 or z.shape != (y.size, x.size):
            raise ValueError(
                f"heights must have shape (ny, nx) = ({y.size}, {x.size}), got {z.shape}"
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("grid coordinates must be finite")
        if np.any(np.isinf(z)):
            raise ValueError("heights must be finite or nan (missing)")
        center = self.center
        if center is None:
            center = (0.5 * (x.min() + x.max()), 0.5 * (y.min() + y.max()))
        center = (float(center[0]), float(center[1]))
        dist = np.hypot(x[None, :] - center[0], y[:, None] - center[1])
        present = ~np.isnan(z)
        rim = self.rim_radius
        if rim is None:
            if not present.any():
                raise ValueError("no non-missing heights; cannot infer the rim radius")
            rim = float(dist[present].max())
        rim = check_positive("rim_radius", rim)
        inside = int(np.count_nonzero(present & (dist <= rim * (1.0 + _RIM_SLACK))))
        if inside < MIN_POINTS:
            raise ValueError(f"need at least {MIN_POINTS} non-missing points inside the rim, got {inside}")
        for name, value in (("x_coords", x), ("y_coords", y), ("heights", z)):
            object.__setattr__(self, name, value)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "rim_radius", rim)

    @property
    def nx(self):
        return self.x_coords.size

    @property
    def ny(self):
        return self.y_coords.size

    @property
    def shape(self):
        return self.heights.shape

    def radii(self):
        """Distance of every cell from ``center`` divided by ``rim_radius``."""
        dx = self.x_coords[None, :] - self.center[0]
        dy = self.y_coords[:, None] - self.center[1]
        return np.hypot(dx, dy) / self.rim_radius


@dataclass(frozen=True)
class RadialSamples:
    """Radial samples in canonical order (sorted by ``r``, then ``h``).

    ``index`` holds the flat grid index each sample came from, or ``-1`` for
    samples not tied to a grid; ``shape`` is the source grid shape.
    """

    r: np.ndarray
    h: np.ndarray
    index: np.ndarray = None
    shape: tuple = None

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).ravel()
        h = np.asarray(self.h, dtype=float).ravel()
        if r.size != h.size:
            raise ValueError("r and h must have the same length")
        if r.size == 0:
            raise ValueError("no samples")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(h))):
            raise ValueError("samples must be finite")
        if r.min() < 0.0 or r.max() > 1.0:
            raise ValueError("normalized radii must lie in [0, 1]")
        index = self.index
        index = np.full(r.size, -1, dtype=np.int64) if index is None else np.asarray(index, dtype=np.int64)
        order = np.lexsort((h, r))
        object.__setattr__(self, "r", r[order])
        object.__setattr__(self, "h", h[order])
        object.__setattr__(self, "index", index[order])

    def __len__(self):
        return self.r.size


@dataclass(frozen=True)
class FitReport:
    params: CornealParams
    mae: float
    rmse: float
    max_abs: float
    objective: float
    n_points_used: int
    objective_evals: int
    converged: bool
    residual_grid: np.ndarray = None
    starts: list = field(default_factory=list)

    def summary(self):
        """Flat key/value view without the residual grid."""
        a, b, alpha = self.params.as_tuple()
        return {
            "a": a,
            "b": b,
            "alpha": alpha,
            "rim_radius_mm": self.params.rim_radius,
            "mae_mm": self.mae,
            "rmse_mm": self.rmse,
            "max_abs_mm": self.max_abs,
            "objective_mm2": self.objective,
            "n_points_used": self.n_points_used,
            "objective_evals": self.objective_evals,
            "converged": self.converged,
        }


def radial_reduce(grid):
    """Map every in-rim, non-missing cell of ``grid`` to an ``(r, h)`` sample.

    Raises
    ------
    ValueError
        If no cell survives.
    """
    r = grid.radii().ravel()
    z = grid.heights.ravel()
    keep = ~np.isnan(z) & (r <= 1.0 + _RIM_SLACK)
    if not keep.any():
        raise ValueError("no non-missing points inside the rim")
    return RadialSamples(np.minimum(r[keep], 1.0), z[keep], np.flatnonzero(keep), grid.shape)


def orient_samples(samples, ring_width=0.02):
    """Shift heights so the outer ring averages zero and flip so the apex is up.

    The ring is ``r >= 1 - ring_width``. If it holds no samples, the
    outermost sample is used instead.
    """
    ring = samples.r >= 1.0 - ring_width
    if not ring.any():
        ring = samples.r == samples.r.max()
    h = samples.h - samples.h[ring].mean()
    centre = samples.r <= samples.r.min() + ring_width
    if h[centre].mean() < 0.0:
        h = -h
    return RadialSamples(samples.r, h, samples.index, samples.shape)


def _penalty(theta, bounds):
    excess = 0.0
    for value, (lo, hi) in zip(theta, bounds):
        if value < lo:
            excess += (lo - value) ** 2
        elif value > hi:
            excess += (value - hi) ** 2
    return excess


def _sse(theta, samples, bounds):
    excess = _penalty(theta, bounds)
    if excess > 0.0 or theta[0] <= 0.0 or theta[1] <= 0.0:
        return PENALTY * (1.0 + excess)
    params = CornealParams(theta[0], theta[1], min(max(theta[2], 0.0), 1.0))
    try:
        model = height(params, samples.r)
    except (OverflowError, NonConvergenceError):
        return PENALTY
    return math.fsum(((model - samples.h) ** 2).tolist())


def objective(params, samples, bounds=DEFAULT_BOUNDS):
    """Sum of squared height residuals, compensated and in canonical order.

    Parameters outside ``bounds`` give a large finite penalty.
    """
    if not isinstance(samples, RadialSamples):
        samples = RadialSamples(*samples)
    return _sse(np.array(params.as_tuple()), samples, bounds)


def _check_bounds(bounds):
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    if len(bounds) != 3 or any(not lo < hi for lo, hi in bounds):
        raise ValueError("bounds must be three (low, high) pairs with low < high")
    (alo, _), (blo, _), (qlo, qhi) = bounds
    if alo < 0.0 or blo < 0.0 or qlo < 0.0 or qhi > 1.0:
        raise ValueError("bounds need a, b >= 0 and alpha within [0, 1]")
    return bounds


def _shape(a, alpha, r):
    """Model height per unit ``b``."""
    return height(CornealParams(a, 1.0, alpha), r)


def _best_b(phi, h, b_bounds):
    """Least-squares ``b`` for a fixed shape, clipped to its bounds."""
    den = math.fsum((phi * phi).tolist())
    b = math.fsum((phi * h).tolist()) / den if den > 0.0 else b_bounds[0]
    return min(max(b, b_bounds[0]), b_bounds[1])


def _profiled_sse(theta, samples, bounds):
    """Objective over ``(a, alpha)`` with ``b`` eliminated in closed form."""
    a, alpha = theta
    excess = _penalty((a, alpha), (bounds[0], bounds[2]))
    if excess > 0.0 or a <= 0.0:
        return PENALTY * (1.0 + excess), None
    try:
        phi = _shape(a, alpha, samples.r)
    except (OverflowError, NonConvergenceError):
        return PENALTY, None
    b = _best_b(phi, samples.h, bounds[1])
    return math.fsum(((b * phi - samples.h) ** 2).tolist()), b


def _nelder_mead(fun, start, fatol, xtol, max_evals):
    res = optimize.minimize(
        fun,
        start,
        method="Nelder-Mead",
        options=dict(xatol=xtol, fatol=fatol, maxfev=max_evals),
    )
    return res, res.nfev


def fit(samples, init=None, bounds=DEFAULT_BOUNDS, ftol=1e-12, xtol=1e-8, max_evals=20_000, rim_radius=1.0):
    """Fit ``(a, b, alpha)`` to radial samples.

    The model is linear in ``b``, so for each trial ``(a, alpha)`` the best
    ``b`` is solved in closed form and Nelder-Mead searches only over
    ``(a, alpha)``. The minimizer is the same as a search over all three
    parameters. Each start is run to convergence and then restarted once
    from its best vertex with a fresh simplex. The lowest objective over
    all starts wins.

    Parameters
    ----------
    samples : RadialSamples or (r, h) pair
    init : CornealParams or tuple, optional
        Extra starting point tried before the three defaults; its ``b`` is
        ignored because ``b`` is solved for.
    bounds : sequence of (low, high)
        Box for ``a``, ``b`` and ``alpha``. ``a`` and ``alpha`` are enforced
        by penalty, ``b`` by clipping its closed-form value.
    ftol : float
        Objective tolerance relative to the sum of squared heights, which is
        the objective of the zero surface.
    xtol : float
        Absolute simplex-size tolerance on ``(a, alpha)``.
    max_evals : int
        Evaluation cap per optimizer run.
    rim_radius : float
        Stored in the returned parameters; radii are already normalized.

    Returns
    -------
    FitReport
        ``converged`` is False when the winning start missed a tolerance.
    """
    if not isinstance(samples, RadialSamples):
        samples = RadialSamples(*samples)
    bounds = _check_bounds(bounds)
    ftol = check_positive("ftol", ftol)
    xtol = check_positive("xtol", xtol)
    max_evals = check_int("max_evals", max_evals, 10)

    starts = [tuple(map(float, s)) for s in DEFAULT_STARTS]
    if init is not None:
        init = init.as_tuple() if isinstance(init, CornealParams) else tuple(map(float, init))
        starts.insert(0, init)

    def fun(theta):
        return _profiled_sse(theta, samples, bounds)[0]

    fatol = ftol * max(math.fsum((samples.h**2).tolist()), np.finfo(float).tiny)

    best = None
    total_evals = 0
    history = []
    for start in starts:
        res, nfev = _nelder_mead(fun, np.array([start[0], start[2]]), fatol, xtol, max_evals)
        total_evals += nfev
        again, nfev = _nelder_mead(fun, res.x, fatol, xtol, max_evals)
        total_evals += nfev
        if again.fun <= res.fun:
            res = again
        ok = bool(res.success and res.fun < PENALTY)
        history.append({"start": start, "x": tuple(res.x), "objective": float(res.fun), "converged": ok})
        if best is None or res.fun < best[0].fun:
            best = (res, ok)

    res, ok = best
    a, alpha = res.x
    sse, b = _profiled_sse(res.x, samples, bounds)
    if b is None:
        raise NonConvergenceError("no start reached the feasible region")
    params = CornealParams(a, b, alpha, rim_radius)
    resid = np.abs(height(params, samples.r) - samples.h)

    residual_grid = None
    if samples.shape is not None and np.all(samples.index >= 0):
        residual_grid = np.full(samples.shape, np.nan)
        residual_grid.flat[samples.index] = resid

    return FitReport(
        params=params,
        mae=float(np.mean(resid)),
        rmse=float(math.sqrt(math.fsum((resid**2).tolist()) / resid.size)),
        max_abs=float(resid.max()),
        objective=float(sse),
        n_points_used=int(resid.size),
        objective_evals=total_evals,
        converged=ok,
        residual_grid=residual_grid,
        starts=history,
    )


def fit_grid(grid, orient=False, **kwargs):
    """Reduce ``grid``, optionally orient it, and :func:`fit` the samples."""
    samples = radial_reduce(grid)
    if orient:
        samples = orient_samples(samples)
    return fit(samples, rim_radius=grid.rim_radius, **kwargs)


def residual_map(grid, params):
    """Absolute model residuals on the grid layout; ``nan`` where unused."""
    samples = radial_reduce(grid)
    out = np.full(grid.shape, np.nan)
    out.flat[samples.index] = np.abs(height(params, samples.r) - samples.h)
    return out


def synthesize_grid(params, nx=123, ny=123, noise_sigma=0.0, seed=None, center=(0.0, 0.0)):
    """Model heights on an ``nx`` by ``ny`` grid spanning the rim's bounding box.

    Cells outside the rim are missing. Gaussian noise of standard deviation
    ``noise_sigma`` (mm) is added after evaluating the model, drawn in
    row-major order of the in-rim cells.
    """
    nx = check_int("nx", nx, 2)
    ny = check_int("ny", ny, 2)
    noise_sigma = check_nonnegative("noise_sigma", noise_sigma)
    rim = params.rim_radius
    x = center[0] + np.linspace(-rim, rim, nx)
    y = center[1] + np.linspace(-rim, rim, ny)
    r = np.hypot(x[None, :] - center[0], y[:, None] - center[1]) / rim
    inside = r <= 1.0
    z = np.full(r.shape, np.nan)
    z[inside] = height(params, r[inside])
    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        z[inside] += rng.normal(0.0, noise_sigma, size=int(inside.sum()))
    return SurfaceGrid(x, y, z, center=center, rim_radius=rim)
