r"""Marching solver for the Volterra integro-differential form of I0^alpha.

Solves

.. math::

    y'(x) = \frac{1}{\Gamma(\alpha)\,x} \int_0^x (x-t)^{\alpha-1}\, t^{2-\alpha} y(t)\,dt,
    \qquad y(0) = 1,\; y'(0) = 0,

on a uniform grid. The weakly singular kernel is integrated exactly against
the piecewise-linear interpolant of ``t**(2-alpha) * y(t)`` (product
trapezoidal rule) and ``y`` is advanced by the trapezoidal rule applied to
``y'``. The two updates are coupled only linearly through the newest grid
value, so each step is solved in closed form. Nothing here touches the series
coefficients; this is an independent check on :func:`fracbessel.specfun.i0_alpha`.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._validation import check_int, check_positive
from .specfun import as_order, i0_alpha_array

__all__ = [
    "STARTUP_CELLS",
    "ConvergenceRow",
    "OracleSolution",
    "oracle_report",
    "solve_volterra",
]

STARTUP_CELLS = 16


@dataclass(frozen=True)
class OracleSolution:
    alpha: float
    step: float
    grid: np.ndarray
    values: np.ndarray
    derivative_values: np.ndarray


@dataclass(frozen=True)
class ConvergenceRow:
    steps: int
    step: float
    max_abs_diff: float
    max_rel_diff: float
    order: float | None


def _kernel_second_differences(alpha, n):
    """``(d+1)**(a+1) - 2 d**(a+1) + (d-1)**(a+1)`` for ``d = 0 .. n``.

    Evaluated as ``d**(a+1) * (expm1(a L+) + expm1(a L-))`` with
    ``L+- = log1p(+-1/d)`` to limit cancellation at large ``d``.
    """
    a = alpha + 1.0
    out = np.zeros(n + 1)
    if n >= 1:
        out[1] = 2.0**a - 2.0
    if n >= 2:
        d = np.arange(2, n + 1, dtype=float)
        e = 1.0 / d
        out[2:] = d**a * (np.expm1(a * np.log1p(e)) + np.expm1(a * np.log1p(-e)))
    return out


def _cell_left_weight(alpha, d):
    """Weight of the left node of a cell at distance ``d`` (in steps, ``d >= 1``)
    under the product trapezoidal rule, without the ``h**alpha`` factor."""
    a = alpha
    full = (d**a - (d - 1.0) ** a) / a
    right = d * full - (d ** (a + 1.0) - (d - 1.0) ** (a + 1.0)) / (a + 1.0)
    return full - right


def _startup_weights(alpha, k, cells):
    """Node weights for ``y`` on the first ``cells`` cells at grid point ``k``.

    The kernel times ``t**(2-alpha)`` is integrated exactly against the
    linear interpolant of ``y``, via incomplete Beta functions; units are
    ``h**2`` so the caller rescales. Returns an array of ``cells + 1`` weights.
    """
    u = np.arange(cells + 1, dtype=float) / k
    b0 = special.beta(3.0 - alpha, alpha) * special.betainc(3.0 - alpha, alpha, u)
    b1 = special.beta(4.0 - alpha, alpha) * special.betainc(4.0 - alpha, alpha, u)
    m0 = k**2 * np.diff(b0)
    m1 = k**3 * np.diff(b1)
    j = np.arange(cells, dtype=float)
    w = np.zeros(cells + 1)
    w[:-1] += (j + 1.0) * m0 - m1
    w[1:] += m1 - j * m0
    return w


def solve_volterra(alpha, x_max, steps, startup_cells=STARTUP_CELLS):
    """March the integro-differential equation from 0 to ``x_max``.

    Parameters
    ----------
    alpha : FracOrder or float
        Order in (0, 1]. At 1 the kernel is regular and the same weights
        reduce to the ordinary trapezoidal rule.
    x_max : float
        Right end of the grid.
    steps : int
        Number of uniform steps, at least 2.
    startup_cells : int, optional
        Number of cells next to the origin where ``t**(2-alpha)`` is kept
        inside the exactly integrated weight instead of being interpolated.
        Linear interpolation of ``t**(2-alpha)`` is poor on the first few
        cells, which spoils ``y'(x)/x`` near 0. Zero disables the correction.

    Returns
    -------
    OracleSolution

    Raises
    ------
    FloatingPointError
        If the marched solution stops being finite.
    """
    alpha = as_order(alpha).alpha
    if alpha == 0.0:
        raise ValueError("alpha must be > 0 for the integral form")
    x_max = check_positive("x_max", x_max)
    steps = check_int("steps", steps, 2)
    m = min(check_int("startup_cells", startup_cells, 0), steps)

    h = x_max / steps
    grid = np.arange(steps + 1) * h
    grid[-1] = x_max
    y = np.empty(steps + 1)
    dy = np.empty(steps + 1)
    g = np.empty(steps + 1)
    y[0], dy[0], g[0] = 1.0, 0.0, 0.0

    inv_gamma = 1.0 / math.gamma(alpha)
    trap = h**alpha / (alpha * (alpha + 1.0))
    second = _kernel_second_differences(alpha, steps)
    tilt = grid ** (2.0 - alpha)

    for k in range(1, steps + 1):
        xk = grid[k]
        if k <= m:
            w = h**2 * _startup_weights(alpha, k, k)
            known = np.dot(w[:-1], y[:k])
            implicit = w[-1]
        else:
            known = h**2 * np.dot(_startup_weights(alpha, k, m), y[: m + 1])
            # Node m closes the start-up region: only its right-hand cell is
            # a product-trapezoid cell, so it carries a one-sided weight.
            known += h**alpha * _cell_left_weight(alpha, k - m) * g[m]
            if k - 1 > m:
                known += trap * np.dot(second[k - m - 1 : 0 : -1], g[m + 1 : k])
            implicit = trap * tilt[k]
        sigma = inv_gamma * known / xk
        beta = inv_gamma * implicit / xk
        y[k] = (y[k - 1] + 0.5 * h * (dy[k - 1] + sigma)) / (1.0 - 0.5 * h * beta)
        dy[k] = sigma + beta * y[k]
        g[k] = tilt[k] * y[k]
        if not (math.isfinite(y[k]) and math.isfinite(dy[k])):
            raise FloatingPointError(f"solution blew up at x={xk!r}")

    return OracleSolution(alpha, h, grid, y, dy)


def _compare(alpha, x_max, steps):
    sol = solve_volterra(alpha, x_max, steps)
    exact = i0_alpha_array(alpha, sol.grid)
    diff = np.abs(sol.values - exact)
    return sol.step, float(diff.max()), float((diff / exact).max())


def oracle_report(alpha, x_max, steps_list, workers=1):
    """Max differences between the oracle and the series per step count.

    The ``order`` column is the observed convergence order of the max
    relative difference between consecutive rows; it is ``None`` on the
    first row. Independent solves run on up to ``workers`` threads; the
    table does not depend on the thread count.
    """
    alpha = as_order(alpha).alpha
    steps_list = [check_int("steps", s, 2) for s in steps_list]
    if not steps_list:
        raise ValueError("steps_list must not be empty")
    if any(b <= a for a, b in zip(steps_list, steps_list[1:])):
        raise ValueError("steps_list must be strictly increasing")

    workers = check_int("workers", workers, 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda s: _compare(alpha, x_max, s), steps_list))

    rows = []
    for steps, (step, max_abs, max_rel) in zip(steps_list, results):
        order = None
        if rows and rows[-1].max_rel_diff > 0.0 and max_rel > 0.0:
            order = math.log(rows[-1].max_rel_diff / max_rel) / math.log(steps / rows[-1].steps)
        rows.append(ConvergenceRow(steps, step, max_abs, max_rel, order))
    return rows
