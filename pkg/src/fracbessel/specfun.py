r"""Special functions for the modified fractional Bessel function of order zero.

The function :math:`I_0^\alpha` is the even power series

.. math::

    I_0^\alpha(x) = \sum_{n \ge 0} c_n x^{2n}, \qquad c_0 = 1, \qquad
    \frac{c_n}{c_{n-1}} = \frac{\Gamma(2n - \alpha + 1)}{(2n)^2 \, \Gamma(2n)},

which solves :math:`x^\alpha D_0^\alpha(x y') = x^2 y` with :math:`y(0) = 1`.
It reduces to :math:`I_0(x)` at :math:`\alpha = 1` and to :math:`e^{x^2/2}` at
:math:`\alpha = 0`; both endpoints go through the same series code.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._validation import (
    NonConvergenceError,
    check_finite,
    check_int,
    check_nonnegative,
    check_positive,
    check_rel_tol,
)

__all__ = [
    "DEFAULT_REL_TOL",
    "MAX_TERMS",
    "CoeffTable",
    "FracOrder",
    "NonConvergenceError",
    "SeriesEval",
    "as_order",
    "asym_prefactor_exponent",
    "coeff_table",
    "f_mu",
    "f_mu_expansion",
    "gamma",
    "gamma_ratio",
    "i0_alpha",
    "i0_alpha_array",
    "i0_alpha_asym",
    "recip_gamma",
]

DEFAULT_REL_TOL = 1e-12
MAX_TERMS = 10_000

# Below this, coefficients are tracked in log space only.
_LOG_SWITCH = -690.0
_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class FracOrder:
    """Fractional order ``alpha`` in the closed interval [0, 1]."""

    alpha: float

    def __post_init__(self):
        alpha = check_finite("alpha", self.alpha)
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
        object.__setattr__(self, "alpha", alpha)

    def __float__(self):
        return self.alpha


def as_order(alpha):
    """Coerce a float or :class:`FracOrder` to a validated :class:`FracOrder`."""
    if isinstance(alpha, FracOrder):
        return alpha
    return FracOrder(alpha)


@dataclass(frozen=True)
class SeriesEval:
    """Result of a truncated positive-series evaluation.

    ``last_term_magnitude`` is the last (smallest) term included and
    ``tail_bound`` bounds everything omitted after it, using the geometric
    decay of the term ratios.
    """

    value: float
    terms_used: int
    last_term_magnitude: float
    tail_bound: float

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class CoeffTable:
    """Coefficients ``c_0 .. c_N`` of ``x**(2n)`` in the series of I0^alpha."""

    alpha: FracOrder
    coeffs: np.ndarray
    log_coeffs: np.ndarray

    def __len__(self):
        return len(self.coeffs)

    def power_coeffs(self):
        """Coefficients indexed by the power of x (odd entries are zero)."""
        out = np.zeros(2 * len(self.coeffs) - 1)
        out[::2] = self.coeffs
        return out


def gamma(z):
    """Gamma function for positive real arguments.

    Raises
    ------
    ValueError
        If ``z <= 0``.
    OverflowError
        If the result is not representable (``z`` above about 171.6).
    """
    z = check_positive("z", z)
    try:
        return math.gamma(z)
    except OverflowError:
        raise OverflowError(f"gamma({z!r}) overflows double precision") from None


def recip_gamma(z):
    """``1 / gamma(z)`` with the entire-function convention ``0`` at poles."""
    z = float(z)
    if z <= 0.0 and z == math.floor(z):
        return 0.0
    if z > 171.0:
        return math.exp(-math.lgamma(z))
    return 1.0 / math.gamma(z)


# B_2k / (2k (2k - 1)) for the Stirling series of log Gamma.
_STIRLING = tuple(
    b / (2 * k * (2 * k - 1))
    for k, b in enumerate((1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6), start=1)
)


def _ratio(z, a):
    """``Gamma(z + a) / Gamma(z)`` for ``z >= 2`` and ``0 <= a <= 1``.

    Direct Gamma quotient for small ``z``; otherwise the difference of two
    Stirling series written with ``log1p``/``expm1`` so nothing cancels. The
    error stays at a few ulp for every ``z``, and ``a = 0`` gives exactly 1.
    """
    if z <= 40.0:
        return math.gamma(z + a) / math.gamma(z)
    t = math.log1p(a / z)
    s = (z - 0.5) * t + a * math.log(z + a) - a
    for k, coef in enumerate(_STIRLING, start=1):
        p = 1 - 2 * k
        s += coef * z**p * math.expm1(p * t)
    return math.exp(s)


def _gamma_ratios(alpha, count):
    """Yield ``Gamma(2n - alpha + 1) / Gamma(2n)`` for ``n = 1 .. count``.

    Each ratio is evaluated on its own so rounding does not compound with
    ``n``; summing a few hundred terms keeps double-precision accuracy.
    """
    a = 1.0 - alpha
    for n in range(1, count + 1):
        yield _ratio(2.0 * n, a)


def gamma_ratio(alpha, n):
    """``Gamma(2n - alpha + 1) / Gamma(2n)`` for integer ``n >= 1``."""
    alpha = as_order(alpha).alpha
    n = check_int("n", n, 1)
    r = 0.0
    for r in _gamma_ratios(alpha, n):
        pass
    return r


def coeff_table(alpha, N):
    """Series coefficients ``c_0 .. c_N`` by running the coefficient ratio.

    Parameters
    ----------
    alpha : FracOrder or float
        Fractional order in [0, 1].
    N : int
        Highest coefficient index, ``N >= 1``.

    Returns
    -------
    CoeffTable

    Raises
    ------
    FloatingPointError
        If a coefficient underflows double precision (very large ``N``).
        ``log_coeffs`` would still be finite, but ``coeffs`` must stay
        strictly positive.
    """
    order = as_order(alpha)
    N = check_int("N", N, 1)
    coeffs = np.empty(N + 1)
    logs = np.empty(N + 1)
    coeffs[0] = 1.0
    logs[0] = 0.0
    c = 1.0
    log_c = 0.0
    in_log_space = False
    for n, r in enumerate(_gamma_ratios(order.alpha, N), start=1):
        step = r / (2 * n) ** 2
        log_c += math.log(step)
        if not in_log_space:
            c *= step
            in_log_space = log_c < _LOG_SWITCH
        if in_log_space:
            c = math.exp(log_c)
            if c == 0.0:
                raise FloatingPointError(
                    f"coefficient c_{n} underflows (log c_{n} = {log_c:.6g}); "
                    "use log_coeffs or a smaller N"
                )
        coeffs[n] = c
        logs[n] = log_c
    return CoeffTable(order, coeffs, logs)


def i0_alpha(alpha, x, rel_tol=DEFAULT_REL_TOL):
    """Evaluate I0^alpha(x) by its power series.

    Terms are generated by their ratio. Summation stops after the first term
    that is below ``rel_tol`` times the partial sum while the term ratio is
    below 1/2. Term ratios decrease monotonically, so the omitted tail is at
    most ``term * q / (1 - q)``, which is below ``rel_tol`` times the value.

    Parameters
    ----------
    alpha : FracOrder or float
    x : float
        Argument, ``x >= 0``.
    rel_tol : float, optional
        Relative truncation tolerance in (0, 1).

    Returns
    -------
    SeriesEval

    Raises
    ------
    OverflowError
        If the value exceeds double precision.
    NonConvergenceError
        If ``MAX_TERMS`` terms are not enough.
    """
    alpha = as_order(alpha).alpha
    x = check_nonnegative("x", x)
    rel_tol = check_rel_tol(rel_tol)
    if x == 0.0:
        return SeriesEval(1.0, 1, 0.0, 0.0)
    x2 = x * x
    total = 1.0
    term = 1.0
    for n, r in enumerate(_gamma_ratios(alpha, MAX_TERMS), start=1):
        q = (r / (2 * n) ** 2) * x2
        term = term * q
        total += term
        if term < rel_tol * total and q < 0.5:
            return SeriesEval(total, n + 1, term, term * q / (1.0 - q))
        if math.isinf(total):
            raise OverflowError(f"I0^{alpha}({x}) overflows double precision")
    raise NonConvergenceError(f"I0^{alpha}({x}) did not converge in {MAX_TERMS} terms")


def i0_alpha_array(alpha, x, rel_tol=DEFAULT_REL_TOL):
    """Vectorized :func:`i0_alpha` returning values only.

    Each element is summed with exactly the same operations as the scalar
    routine, so results agree bit for bit.
    """
    alpha = as_order(alpha).alpha
    rel_tol = check_rel_tol(rel_tol)
    x = np.asarray(x, dtype=float)
    if x.size and (not np.all(np.isfinite(x)) or np.min(x) < 0.0):
        raise ValueError("x must be finite and >= 0")
    x2 = x * x
    total = np.ones_like(x)
    term = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for n, r in enumerate(_gamma_ratios(alpha, MAX_TERMS), start=1):
        q = (r / (2 * n) ** 2) * x2
        term = term * q
        # Adding 0.0 leaves finished entries bitwise unchanged.
        total += np.where(active, term, 0.0)
        active &= (term >= rel_tol * total) | (q >= 0.5)
        if not active.any():
            return total
        if np.isinf(total).any():
            raise OverflowError(f"I0^{alpha} overflows double precision")
    raise NonConvergenceError(f"I0^{alpha} did not converge in {MAX_TERMS} terms")


def f_mu(mu, x):
    r"""The integral :math:`F_\mu(x) = \int_0^1 t^\mu e^{-x t}\,dt`.

    The interval is split at ``t = min(1, 10/x)``. For ``mu < 0`` the left
    piece uses ``t = u**(1/(mu+1))``, which turns it into
    ``(1/(mu+1)) * int_0^{t0**(mu+1)} exp(-x u**(1/(mu+1))) du`` and removes
    the endpoint singularity.
    """
    mu = check_finite("mu", mu)
    if mu <= -1.0:
        raise ValueError(f"mu must be > -1, got {mu!r}")
    x = check_nonnegative("x", x)
    split = 1.0 if x <= 10.0 else 10.0 / x
    opts = dict(epsabs=0.0, epsrel=1e-12, limit=200)
    if mu < 0.0:
        p = 1.0 / (mu + 1.0)
        left, _ = integrate.quad(lambda u: math.exp(-x * u**p), 0.0, split ** (mu + 1.0), **opts)
        left *= p
    else:
        left, _ = integrate.quad(lambda t: t**mu * math.exp(-x * t), 0.0, split, **opts)
    right = 0.0
    if split < 1.0:
        right, _ = integrate.quad(lambda t: t**mu * math.exp(-x * t), split, 1.0, **opts)
    return left + right


def f_mu_expansion(mu, x, n_terms=20):
    """Large-x expansion of :func:`f_mu`: Gamma leading term minus the
    exponentially small integration-by-parts series, truncated at
    ``n_terms`` terms. For integer ``mu >= 0`` it terminates and is exact.
    """
    mu = check_finite("mu", mu)
    if mu <= -1.0:
        raise ValueError(f"mu must be > -1, got {mu!r}")
    x = check_positive("x", x)
    n_terms = check_int("n_terms", n_terms, 0)
    g = math.gamma(mu + 1.0)
    tail = 0.0
    for k in range(n_terms):
        tail += g * recip_gamma(mu - k + 1.0) / x ** (k + 1)
    return x ** (-(mu + 1.0)) * g - math.exp(-x) * tail


def asym_prefactor_exponent(alpha, form="published"):
    r"""Power of x in the algebraic prefactor of the large-x form of I0^alpha.

    ``form="published"`` gives :math:`-\alpha(2-\alpha)/(1+\alpha)`, the
    published leading-order law. ``form="saddle"`` gives
    :math:`-\alpha(3-\alpha)/(2(1+\alpha))`, obtained by a saddle-point sum of
    the series using :math:`\log c_n \approx -(1+\alpha)\log(2^n n!) -
    \tfrac{\alpha(1-\alpha)}{4}\log n`. The two agree at ``alpha`` = 0 and 1.
    """
    alpha = as_order(alpha).alpha
    if form == "published":
        return -alpha * (2.0 - alpha) / (1.0 + alpha)
    if form == "saddle":
        return -alpha * (3.0 - alpha) / (2.0 * (1.0 + alpha))
    raise ValueError(f"unknown form {form!r}; expected 'published' or 'saddle'")


def i0_alpha_asym(alpha, x, form="published"):
    """Leading-order large-x form of I0^alpha, without its constant factor.

    Returns ``x**p * exp((1+alpha)/2 * x**(2/(1+alpha)))`` with ``p`` from
    :func:`asym_prefactor_exponent`. The multiplicative constant is unknown,
    so only ratios against the series that settle to a constant are
    meaningful.
    """
    alpha = as_order(alpha).alpha
    x = check_positive("x", x)
    p = asym_prefactor_exponent(alpha, form)
    log_value = p * math.log(x) + 0.5 * (1.0 + alpha) * x ** (2.0 / (1.0 + alpha))
    if log_value > _LOG_FLOAT_MAX:
        raise OverflowError(f"asymptotic form overflows at x={x!r}")
    return math.exp(log_value)
