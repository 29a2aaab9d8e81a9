import math

import numpy as np
import pytest
from scipy import special

from fracbessel.specfun import i0_alpha, i0_alpha_array
from fracbessel.volterra import oracle_report, solve_volterra


def test_initial_values():
    sol = solve_volterra(0.5, 1.0, 64)
    assert sol.values[0] == 1.0
    assert sol.derivative_values[0] == 0.0
    assert sol.grid[-1] == 1.0
    assert np.all(np.diff(sol.values) > 0)


def test_half_order_example():
    sol = solve_volterra(0.5, 1.0, 2048)
    assert sol.values[-1] == pytest.approx(i0_alpha(0.5, 1.0).value, rel=1e-6)


def test_alpha_one_path():
    sol = solve_volterra(1.0, 2.0, 2048)
    assert sol.values[-1] == pytest.approx(2.2795853023360673, rel=1e-6)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_agreement_on_unit_interval_pair(alpha):
    sol = solve_volterra(alpha, 2.0, 4096)
    exact = i0_alpha_array(alpha, sol.grid)
    assert np.max(np.abs(sol.values / exact - 1)) <= 1e-4


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_near_origin_slope(alpha):
    # y'(x)/x tends to B(alpha, 3 - alpha)/Gamma(alpha) at the origin.
    limit = special.beta(alpha, 3 - alpha) / math.gamma(alpha)
    sol = solve_volterra(alpha, 1.0, 1024)
    for k in (1, 2, 3, 4):
        assert sol.derivative_values[k] / sol.grid[k] == pytest.approx(limit, rel=1e-2)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.9])
def test_refinement_monotone(alpha):
    rows = oracle_report(alpha, 1.0, [64, 128, 256, 512, 1024])
    errs = [r.max_rel_diff for r in rows]
    assert all(b <= 1.1 * a for a, b in zip(errs, errs[1:]))


def test_report_order_close_to_two():
    rows = oracle_report(0.5, 2.0, [256, 512, 1024])
    assert rows[0].order is None
    for r in rows[1:]:
        assert r.order == pytest.approx(2.0, abs=0.3)


def test_single_row_report():
    rows = oracle_report(0.5, 1.0, [128])
    assert len(rows) == 1 and rows[0].order is None


def test_report_thread_independent():
    a = oracle_report(0.4, 1.0, [64, 128, 256], workers=1)
    b = oracle_report(0.4, 1.0, [64, 128, 256], workers=3)
    assert a == b


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(alpha=0.0, x_max=1.0, steps=10),
        dict(alpha=0.5, x_max=0.0, steps=10),
        dict(alpha=0.5, x_max=1.0, steps=1),
        dict(alpha=1.5, x_max=1.0, steps=10),
    ],
)
def test_solver_rejects_bad_input(kwargs):
    with pytest.raises(ValueError):
        solve_volterra(**kwargs)


def test_report_rejects_bad_steps():
    with pytest.raises(ValueError):
        oracle_report(0.5, 1.0, [128, 64])
    with pytest.raises(ValueError):
        oracle_report(0.5, 1.0, [])


def test_startup_correction_helps_near_origin():
    alpha = 0.25
    limit = special.beta(alpha, 3 - alpha) / math.gamma(alpha)
    plain = solve_volterra(alpha, 1.0, 256, startup_cells=0)
    fixed = solve_volterra(alpha, 1.0, 256)
    err = lambda s: abs(s.derivative_values[1] / s.grid[1] / limit - 1)  # noqa: E731
    assert err(fixed) < err(plain)


def test_blowup_signalled():
    with pytest.raises(FloatingPointError):
        solve_volterra(0.5, 400.0, 4000)
