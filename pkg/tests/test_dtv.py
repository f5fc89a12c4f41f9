"""Total variation distance: exact series, brute-force supremum, H(u)."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cycledens.dtv import (build_h_grid, dickman_total_integral, dtv_estimate,
                           dtv_exact, dtv_nu_bound, dtv_supremum_oracle,
                           h_function)
from cycledens.exactcore import Backend
from cycledens.specialfns import EULER_GAMMA, dickman, xi

# ------------------------------------------------------------------- exact

def test_dtv_1_1_hand_value():
    expected = 1.0 - 1.0 / math.e
    assert dtv_exact(1, 1).exact == pytest.approx(expected, abs=1e-12)
    got = dtv_exact(1, 1, backend=Backend.EXACT_RATIONAL)
    assert got.exact == pytest.approx(expected, abs=1e-12)
    # exact pair A + B e^{-H_1}: 1 - 1/e means A = 1, B = -1
    assert got.exact_pair == (1, -1)


def test_dtv_in_unit_interval():
    for n, r in ((1, 1), (10, 3), (50, 7), (200, 100), (40, 40)):
        res = dtv_exact(n, r)
        assert 0.0 <= res.exact <= 1.0
        assert res.truncation_mass <= 1e-12


def test_dtv_tol_insensitive():
    # the m > n tail is summed in closed form, so tightening tol is a no-op
    a = dtv_exact(60, 4, tol=1e-8).exact
    b = dtv_exact(60, 4, tol=1e-9).exact
    assert abs(a - b) <= 1e-8


def test_dtv_tol_validation():
    with pytest.raises(ValueError):
        dtv_exact(10, 2, tol=1e-3)


def test_dtv_float_matches_rational():
    for n, r in ((20, 3), (50, 12), (100, 60)):
        f = dtv_exact(n, r).exact
        q = dtv_exact(n, r, backend=Backend.EXACT_RATIONAL).exact
        assert f == pytest.approx(q, rel=1e-11)


@settings(deadline=None, max_examples=25)
@given(st.integers(min_value=1, max_value=8))
def test_dtv_supremum_equivalence(n):
    # the series value equals the subset-supremum definition, exactly,
    # as (A, B) pairs meaning A + B e^{-H_r}
    for r in range(1, n + 1):
        series = dtv_exact(n, r, backend=Backend.EXACT_RATIONAL)
        assert series.exact_pair == dtv_supremum_oracle(n, r)


def test_dtv_diagonal_matches_direct_formula():
    # at r = n only m = n meets kappa > 0; closed hand evaluation
    for n in (2, 5, 8):
        t = math.exp(-sum(1.0 / j for j in range(1, n + 1)))
        from cycledens.exactcore import nu_table
        nu = nu_table(n, n, Backend.FLOAT64)
        head = sum(nu[m] * t for m in range(n)) + nu[n] * (1.0 - t)
        tail = 1.0 - t * sum(nu[m] for m in range(n + 1))
        assert dtv_exact(n, n).exact == pytest.approx(0.5 * (head + tail),
                                                      rel=1e-12)


# ------------------------------------------------------------------- H(u)

def test_h_at_one_is_one(rho_grid, omega_grid):
    assert h_function(1.0, rho_grid, omega_grid) == pytest.approx(1.0, abs=1e-10)


def test_h_domain(rho_grid, omega_grid):
    with pytest.raises(ValueError):
        h_function(0.5, rho_grid, omega_grid)


def test_h_decreasing(rho_grid, omega_grid):
    hs = [h_function(u, rho_grid, omega_grid)
          for u in (1.0, 2.0, 4.0, 8.0, 16.0)]
    assert all(h > 0.0 for h in hs)
    assert all(b < a for a, b in zip(hs, hs[1:]))


def test_h_panel_self_consistency(rho_grid, omega_grid):
    for u in (2.0, 5.0, 10.0):
        a = h_function(u, rho_grid, omega_grid, panel_width=1.0)
        b = h_function(u, rho_grid, omega_grid, panel_width=0.5)
        assert abs(a - b) <= 1e-8


def test_h_large_u_diagnostic(rho_grid, omega_grid):
    # H(v) = rho(v) * 2^{v + v/xi + O(v/xi^2)}; at v = 20 the unquantified
    # O(v/xi^2) term is order-one, so only a loose factor is asserted
    lhs = (math.log2(h_function(20.0, rho_grid, omega_grid))
           - math.log2(dickman(20.0, rho_grid)))
    rhs = 20.0 + 20.0 / xi(20.0).xi
    assert 0.4 * rhs <= lhs <= 1.6 * rhs


def test_dickman_total_integral(rho_grid):
    assert dickman_total_integral(rho_grid) == pytest.approx(
        math.exp(EULER_GAMMA), abs=1e-6)


def test_build_h_grid(rho_grid, omega_grid):
    grid = build_h_grid([1.0, 2.0, 3.0], rho_grid, omega_grid)
    assert list(grid.u_values) == [1.0, 2.0, 3.0]
    assert all(h > 0.0 for h in grid.H)
    assert grid.kink_points


# ---------------------------------------------------------------- estimate

def test_dtv_estimate_ratio_shrinks(rho_grid, omega_grid):
    r1 = dtv_estimate(2000, 1000, rho_grid, omega_grid)
    r2 = dtv_estimate(4000, 2000, rho_grid, omega_grid)
    assert abs(r2.emrp_ratio - 1.0) <= 0.75 * abs(r1.emrp_ratio - 1.0)


def test_dtv_estimate_diagonal(rho_grid, omega_grid):
    res = dtv_estimate(64, 64, rho_grid, omega_grid)
    assert res.h_estimate == pytest.approx(1.0, abs=1e-10)
    assert res.emrp_ratio is not None


def test_stark_convergence(rho_grid, omega_grid):
    for u in (1.0, 1.5, 2.0, 3.0):
        hu = h_function(u, rho_grid, omega_grid)
        devs = [abs(dtv_exact(int(u * r), r).exact - hu)
                for r in (250, 500, 1000, 2000)]
        assert all(b < a for a, b in zip(devs, devs[1:])), u


# ---------------------------------------------------------------- nu bound

def test_dtv_nu_bound_dominates():
    assert dtv_nu_bound(100, 20) >= dtv_exact(100, 20).exact


def test_dtv_nu_bound_positive_terms():
    assert dtv_nu_bound(50, 25) > 0.0
    assert dtv_nu_bound(40, 5) > 0.0


def test_dtv_nu_bound_domain():
    with pytest.raises(ValueError):
        dtv_nu_bound(100, 4)
    with pytest.raises(ValueError):
        dtv_nu_bound(10, 10)
