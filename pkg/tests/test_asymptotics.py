"""Saddle-point solver, asymptotic estimates, explicit bounds, dispatch."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cycledens.asymptotics import (Estimate, Regime, kappa_buchstab,
                                   kappa_error_bounds, kappa_explicit_bound,
                                   kappa_explicit_bound_min, nu_dickman,
                                   nu_log_expansion, nu_saddle,
                                   saddle_series_x, select_regime,
                                   solve_saddle)
from cycledens.exactcore import Backend, harmonic, kappa_table, nu_table
from cycledens.specialfns import EULER_GAMMA

# ------------------------------------------------------------------ saddle

def test_saddle_trivial_points():
    assert solve_saddle(7, 1).x == 7.0
    assert solve_saddle(6, 2).x == pytest.approx(2.0, rel=1e-12)
    assert solve_saddle(50, 50).x == 1.0


def test_saddle_bracket_example():
    x = solve_saddle(1000, 10).x
    assert 100.0 ** 0.1 <= x <= 100.0 ** (2.0 / 11.0)


@given(st.integers(min_value=2, max_value=60), st.integers(min_value=1, max_value=40))
@settings(deadline=None)
def test_saddle_residual_and_bracket(u_times_ten, r):
    n = max(r, (u_times_ten * r) // 10 + r)      # keep n >= r
    sp = solve_saddle(n, r)
    assert abs(sp.lambda1 - n) <= 1e-10 * n
    u = n / r
    if u > 1.0 and r < n:
        assert u ** (1.0 / r) - 1e-12 <= sp.x <= u ** (2.0 / (r + 1)) + 1e-12


def test_lambda2_identity():
    # lambda2 = r^2 u + r (x - u)/(x - 1) wherever the closed form applies
    for n, r in ((1000, 10), (5000, 100), (300, 7), (10 ** 6, 40)):
        sp = solve_saddle(n, r)
        u = n / r
        direct = math.fsum(j * sp.x ** j for j in range(1, r + 1))
        assert sp.lambda2 == pytest.approx(direct, rel=1e-10)
        assert sp.lambda2 == pytest.approx(
            r * r * u + r * (sp.x - u) / (sp.x - 1.0), rel=1e-10)


def test_lambda2_bound_large_u():
    for n, r in ((10 ** 5, 10), (10 ** 4, 3)):
        sp = solve_saddle(n, r)
        u = n / r
        assert abs(sp.lambda2 / (r * r * u) - 1.0) <= 1.0 / math.log(u)


def test_saddle_series_cross_check():
    assert saddle_series_x(10 ** 6, 2) == pytest.approx(
        solve_saddle(10 ** 6, 2).x, rel=1e-3)
    err_small = abs(saddle_series_x(100, 3) / solve_saddle(100, 3).x - 1.0)
    err_big = abs(saddle_series_x(10 ** 4, 3) / solve_saddle(10 ** 4, 3).x - 1.0)
    assert err_big < err_small
    assert saddle_series_x(100, 2) > 0.0


def test_saddle_series_domain():
    with pytest.raises(ValueError):
        saddle_series_x(100, 20)


# --------------------------------------------------------------- nu_saddle

def test_nu_saddle_classical_regime():
    exact = nu_table(100, 2)[100]
    ratio = math.exp(nu_saddle(100, 2).log_value) / exact
    assert 0.9 <= ratio <= 1.1


def test_nu_saddle_diagonal_diagnostic():
    # exact nu(50,50) = 1; the formula is finite and order-one there
    est = nu_saddle(50, 50)
    assert est.valid
    assert 0.1 < est.value < 10.0


def test_nu_saddle_convergence_order():
    # error O(r/n): fix r, double n (u grows from 10)
    prev = None
    for n in (1000, 2000, 4000, 8000):
        exact = math.log(nu_table(n, 100)[n])
        err = abs(math.exp(nu_saddle(n, 100).log_value - exact) - 1.0)
        if prev is not None:
            assert err <= 0.75 * prev + 1e-12
        prev = err


def test_nu_saddle_u10_shrink():
    e1 = abs(math.exp(nu_saddle(1000, 100).log_value
                      - math.log(nu_table(1000, 100)[1000])) - 1.0)
    e2 = abs(math.exp(nu_saddle(2000, 200).log_value
                      - math.log(nu_table(2000, 200)[2000])) - 1.0)
    # at fixed u the relative error tends to a nonzero constant; it must
    # at least not grow
    assert e2 <= e1 + 1e-12


# --------------------------------------------------------- nu_log_expansion

def test_nu_log_expansion_r1_is_factorial():
    n = 10 ** 4
    est = nu_log_expansion(n, 1).log_value
    exact = -math.lgamma(n + 1)
    assert est == pytest.approx(exact, rel=1e-6)


def test_nu_log_expansion_r2_shape():
    # exponent terms: -(n log n)/2 + n/2 + sqrt(n) - 1/4, prefactor 1/sqrt(4 pi n)
    n = 10 ** 4
    expected = (-0.5 * math.log(4.0 * math.pi * n)
                - 0.5 * n * math.log(n) + 0.5 * n + math.sqrt(n) - 0.25)
    assert nu_log_expansion(n, 2).log_value == pytest.approx(expected, rel=1e-12)


def test_nu_log_expansion_r3_shape():
    # exponent terms: n^{2/3}/2 + (5/6) n^{1/3} - 5/18 on top of the leading pair
    n = 10 ** 4
    expected = (-0.5 * math.log(2.0 * math.pi * n * 3)
                - n * math.log(n) / 3.0 + n / 3.0
                + 0.5 * n ** (2.0 / 3.0) + (5.0 / 6.0) * n ** (1.0 / 3.0)
                - 5.0 / 18.0)
    assert nu_log_expansion(n, 3).log_value == pytest.approx(expected, rel=1e-12)


def test_nu_log_expansion_matches_saddle_in_overlap():
    for n, r in ((10 ** 3, 2), (10 ** 3, 3), (10 ** 4, 5), (10 ** 5, 7)):
        assert r <= math.log(n)
        a = nu_log_expansion(n, r).log_value
        b = nu_saddle(n, r).log_value
        assert abs(a - b) <= 1e-2 * abs(b)


def test_nu_log_expansion_valid_flag():
    assert nu_log_expansion(10 ** 4, 2).valid
    assert not nu_log_expansion(100, 20).valid    # still computes


# ---------------------------------------------------------------- dickman

def test_nu_dickman_at_u1_exact():
    est = nu_dickman(100, 100)
    assert est.value == pytest.approx(1.0, abs=1e-12)
    est_c = nu_dickman(100, 100, corrected=True)
    assert est_c.value == pytest.approx(1.0, abs=1e-12)


def test_nu_dickman_error_halves(rho_grid):
    prev = None
    for r in (500, 1000, 2000, 4000):
        n = 2 * r
        exact = math.log(nu_table(n, r)[n])
        err = abs(math.exp(nu_dickman(n, r, rho_grid).log_value - exact) - 1.0)
        if prev is not None:
            assert err <= 0.6 * prev
        prev = err


def test_nu_dickman_corrected_dominates(rho_grid):
    n, r = 3000, 300
    exact = math.log(nu_table(n, r)[n])
    plain = abs(math.exp(nu_dickman(n, r, rho_grid).log_value - exact) - 1.0)
    corr = abs(math.exp(nu_dickman(n, r, rho_grid, corrected=True).log_value
                        - exact) - 1.0)
    assert corr < plain


def test_nu_dickman_valid_flags():
    assert nu_dickman(4000, 2000).valid
    assert not nu_dickman(4000, 30).valid
    assert nu_dickman(3000, 300, corrected=True).valid


# ---------------------------------------------------------------- buchstab

def test_kappa_buchstab_trivial_point(omega_grid):
    est = kappa_buchstab(9, 5, omega_grid)
    # exact is 1/9; the u = 1.8 main term is within ~10% there
    ratio = est.value * 9.0
    assert 0.8 < ratio < 1.1


def test_kappa_buchstab_error_shrinks(omega_grid):
    # |kappa - e^{-H_r+gamma} omega(2)| = O(1/r^2): >= 4x per doubling
    prev = None
    for r in (500, 1000, 2000):
        n = 2 * r
        exact = kappa_table(n, r, cross_check=False)[n]
        est = math.exp(-harmonic(r).value + EULER_GAMMA) * 0.5
        dev = abs(exact - est)
        if prev is not None:
            assert dev <= 0.26 * prev
        prev = dev


def test_kappa_buchstab_fixed_u10_shrink(omega_grid):
    d1 = abs(kappa_table(10 ** 4, 10 ** 3, cross_check=False)[10 ** 4]
             - kappa_buchstab(10 ** 4, 10 ** 3, omega_grid).value)
    d2 = abs(kappa_table(10 ** 5, 10 ** 4, cross_check=False)[10 ** 5]
             - kappa_buchstab(10 ** 5, 10 ** 4, omega_grid).value)
    assert d2 < d1


# ----------------------------------------------------------- explicit bound

def test_kappa_explicit_bound_domain():
    with pytest.raises(ValueError):
        kappa_explicit_bound(100, 10, 1.0)
    with pytest.raises(ValueError):
        kappa_explicit_bound(100, 60, 2.0)


def test_kappa_explicit_bound_positive():
    u = 10.0
    alpha = math.exp(math.log(u) / 10.0)
    bp = kappa_explicit_bound(100, 10, alpha)
    assert bp.bound > 0.0
    assert math.isfinite(bp.log_bound)


def test_kappa_explicit_bound_dominates_sample():
    for n in (30, 80, 150):
        for r in range(1, n // 2, 3):
            exact = kappa_table(n, r, Backend.EXACT_RATIONAL,
                                cross_check=False)[n]
            # rational kappa vs float e^{-H_r}: resolvable when the gap
            # is far above double noise
            truth = abs(float(exact) - math.exp(-harmonic(r).value))
            if truth < 1e-12:
                continue
            bp = kappa_explicit_bound_min(n, r)
            assert bp.log_bound >= math.log(truth) - 1e-9, (n, r)


def test_kappa_explicit_bound_min_beats_endpoint():
    n, r = 100, 10
    u = n / r
    assert (kappa_explicit_bound_min(n, r).log_bound
            <= kappa_explicit_bound(n, r, u ** (1.0 / r)).log_bound)


# --------------------------------------------------------- labeled envelopes

def test_kappa_error_bounds_arratia_tavare(rho_grid):
    bounds = kappa_error_bounds(10 ** 4, 10 ** 3, rho_grid)
    at = next(b for b in bounds if b.regime is Regime.AT_EXPLICIT)
    expected = (math.sqrt(2.0 * math.pi * 10.0) * 2.0 ** 9 / math.factorial(9)
                + 1.0 / math.factorial(10) + 3.0 * (math.e / 10.0) ** 10)
    assert at.value == pytest.approx(expected, rel=1e-12)
    assert at.explicit_constant


def test_kappa_explicit_beats_arratia_tavare(rho_grid):
    bounds = kappa_error_bounds(10 ** 4, 10 ** 3, rho_grid)
    at = next(b for b in bounds if b.regime is Regime.AT_EXPLICIT)
    ex = next(b for b in bounds if b.regime is Regime.EXPLICIT_BOUND)
    assert ex.log_value <= at.log_value


def test_kappa_error_bounds_u1_edge(rho_grid):
    bounds = kappa_error_bounds(11, 10, rho_grid)
    at = next(b for b in bounds if b.regime is Regime.AT_EXPLICIT)
    assert math.isfinite(at.log_value)


def test_kappa_error_bounds_labels(rho_grid):
    bounds = kappa_error_bounds(1000, 30, rho_grid)
    regimes = {b.regime for b in bounds}
    assert {Regime.EPS_DELTA_BOUND, Regime.NU_LINKED_BOUND,
            Regime.SMALL_R_BOUND, Regime.AT_EXPLICIT, Regime.AW_BOUND,
            Regime.EXPLICIT_BOUND} <= regimes
    for b in bounds:
        assert isinstance(b, Estimate)


# ------------------------------------------------------------------ dispatch

def test_select_regime_examples(rho_grid, omega_grid):
    assert select_regime(10 ** 6, 10, "nu").regime is Regime.LOG_EXPANSION
    assert select_regime(10 ** 4, 5000, "kappa", rho_grid, omega_grid).regime \
        is Regime.BUCHSTAB_MAIN
    assert select_regime(10 ** 4, 50, "nu").regime is Regime.SADDLE_EXACT


def test_select_regime_kappa_branches(rho_grid, omega_grid):
    assert select_regime(10 ** 4, 5, "kappa", rho_grid, omega_grid).regime \
        is Regime.SMALL_R_BOUND
    assert select_regime(10 ** 4, 50, "kappa", rho_grid, omega_grid).regime \
        is Regime.EXPLICIT_BOUND
    # n/2 <= r < n but below sqrt(n log n) never happens for n >= 7;
    # the trivial 1/n branch still covers r >= n/2 when the Buchstab
    # range check fails at tiny n
    est = select_regime(6, 3, "kappa", rho_grid, omega_grid)
    assert est.log_value == pytest.approx(-math.log(6.0))
