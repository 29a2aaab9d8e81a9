r"""Riemann-Liouville fractional integrals and derivatives on power series.

Everything acts on monomials in closed form:

.. math::

    D_0^{-\mu} t^n = \frac{\Gamma(n+1)}{\Gamma(n+\mu+1)} x^{n+\mu}, \qquad
    D_0^{\alpha} t^n = \frac{\Gamma(n+1)}{\Gamma(n-\alpha+1)} x^{n-\alpha}.

The derivative uses the reciprocal Gamma function, so ``D^1`` annihilates
constants without a special case. For analytic ``y`` with ``x y'`` vanishing
at the origin, Riemann-Liouville and Caputo derivatives coincide; only the
former is implemented.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import (
    NonConvergenceError,
    check_finite,
    check_nonnegative,
    check_positive,
    check_rel_tol,
)
from .specfun import DEFAULT_REL_TOL, as_order, coeff_table, recip_gamma

__all__ = [
    "PowerSeries",
    "frac_deriv_monomial",
    "frac_deriv_series",
    "frac_integral_monomial",
    "i0_alpha_power_series",
    "x_dy_dx",
]


@dataclass(frozen=True)
class PowerSeries:
    """Truncated power series ``sum_n coeffs[n] * x**n``."""

    coeffs: np.ndarray
    radius_hint: float = math.inf

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ValueError("coeffs must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coeffs must be finite")
        if not self.radius_hint > 0:
            raise ValueError("radius_hint must be positive")
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, x):
        # Highest power first is Horner order; numpy.polyval wants that.
        return np.polyval(self.coeffs[::-1], x)


def _log_gamma_quotient(num, den):
    return math.lgamma(num) - math.lgamma(den)


def frac_integral_monomial(mu, n, x):
    """Fractional integral of order ``mu`` of ``t**n`` evaluated at ``x``."""
    mu = check_positive("mu", mu)
    n = check_nonnegative("n", n)
    x = check_nonnegative("x", x)
    if x == 0.0:
        return 0.0
    if n + mu + 1.0 < 171.0:
        coef = math.gamma(n + 1.0) / math.gamma(n + mu + 1.0)
    else:
        coef = math.exp(_log_gamma_quotient(n + 1.0, n + mu + 1.0))
    return coef * x ** (n + mu)


def frac_deriv_monomial(alpha, n, x):
    """Riemann-Liouville derivative of order ``alpha`` of ``t**n`` at ``x > 0``.

    ``alpha`` must lie in (0, 1]. At ``n = 0, alpha = 1`` the Gamma pole in the
    denominator gives exactly 0.
    """
    alpha = as_order(alpha).alpha
    if alpha == 0.0:
        raise ValueError("alpha must be > 0 for a derivative")
    n = check_nonnegative("n", n)
    x = check_positive("x", x)
    if n + 1.0 < 171.0:
        coef = math.gamma(n + 1.0) * recip_gamma(n - alpha + 1.0)
    else:
        coef = math.exp(_log_gamma_quotient(n + 1.0, n - alpha + 1.0))
    return coef * x ** (n - alpha)


def frac_deriv_series(alpha, p, x, rel_tol=DEFAULT_REL_TOL):
    """Termwise fractional derivative of a power series at ``x``.

    Uses the same stopping rule as :func:`fracbessel.specfun.i0_alpha`: stop
    at a term below ``rel_tol`` times the running sum once consecutive terms
    shrink by at least half. A finite series otherwise sums exactly.

    Raises
    ------
    NonConvergenceError
        If ``x`` lies outside ``p.radius_hint``.
    """
    rel_tol = check_rel_tol(rel_tol)
    x = check_positive("x", x)
    if x > p.radius_hint:
        raise NonConvergenceError(f"x={x!r} outside the radius hint {p.radius_hint!r}")
    total = 0.0
    prev = None
    for n, c in enumerate(p.coeffs):
        if c == 0.0:
            continue
        term = c * frac_deriv_monomial(alpha, n, x)
        if prev is not None and total != 0.0:
            small = abs(term) < rel_tol * abs(total)
            if small and abs(term) < 0.5 * abs(prev):
                break
        total += term
        prev = term
    return total


def x_dy_dx(p):
    """Power series of ``x * y'(x)`` for ``y`` given by ``p``."""
    n = np.arange(p.coeffs.size, dtype=float)
    return PowerSeries(n * p.coeffs, p.radius_hint)


def i0_alpha_power_series(alpha, n_even_terms):
    """Truncated series of I0^alpha as a :class:`PowerSeries` in powers of x."""
    table = coeff_table(alpha, n_even_terms)
    return PowerSeries(table.power_coeffs())
