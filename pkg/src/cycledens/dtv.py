"""Total variation distance between truncated cycle counts and Poissons.

d_TV(n, r) = (1/2) sum_{m>=0} nu(m, r) |kappa(n-m, r) - e^{-H_r}|,
with kappa(k, r) = 0 for k < 0 and kappa(0, r) = 1.  The m > n tail is
summed in closed form from the normalization identity
sum_m nu(m, r) e^{-H_r} = 1, so no truncation bias enters.

Exact (rational-backend) results are carried as pairs (A, B) meaning
A + B * e^{-H_r} with A, B rational, which keeps the subset-supremum
comparison exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exactcore
from .exactcore import Backend, harmonic, kappa_table, nu_table
from .specialfns import (EULER_GAMMA, SpecialGrid, buchstab,
                         buchstab_sign_changes, dickman)


@dataclass(frozen=True)
class DtvResult:
    n: int
    r: int
    exact: float
    truncation_mass: float
    h_estimate: float | None = None
    emrp_ratio: float | None = None
    cor43_bound: float | None = None
    exact_pair: tuple[Fraction, Fraction] | None = None  # A + B e^{-H_r}


@dataclass(frozen=True)
class HGrid:
    u_values: np.ndarray
    H: np.ndarray
    kink_points: list[float]    # sign changes of omega - e^-gamma


def _sign_vs_exp_neg_hr(q: Fraction, r: int) -> int:
    """Sign of q - e^{-H_r} for rational q.

    e^{-H_r} is irrational, so the difference is never zero; double
    precision separates them at desk scale (guarded by an assertion).
    """
    d = float(q) - math.exp(-harmonic(r).value)
    if abs(d) < 1e-13:
        raise ArithmeticError(
            f"cannot resolve sign of kappa - e^-H_r at r={r}: |diff|={d:.3g}")
    return 1 if d > 0 else -1


def dtv_exact(n: int, r: int, tol: float = 1e-12,
              backend: Backend = Backend.FLOAT64) -> DtvResult:
    """Exact series evaluation of d_TV(n, r).

    Only m <= n contributes through kappa; the remaining Poisson mass
    enters as e^{-H_r} times (1 - accumulated mass), exactly.
    """
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    if not 0.0 < tol <= 1e-6:
        raise ValueError(f"tol must be in (0, 1e-6], got {tol}")

    nu = nu_table(n, r, backend)
    if r < n:
        kap = kappa_table(n, r, backend, cross_check=False)
        kap_vals = kap.values
    else:
        one = Fraction(1) if backend is Backend.EXACT_RATIONAL else 1.0
        kap_vals = [one] + [one - one] * n   # kappa(k, n) = 1{k=0}

    if backend is Backend.EXACT_RATIONAL:
        # accumulate A + B e^{-H_r}: |kappa - t| = s*kappa - s*t, s = sign
        A = Fraction(0)
        B = Fraction(0)
        mass = Fraction(0)      # coefficient of t in the accumulated mass
        for m in range(n + 1):
            s = _sign_vs_exp_neg_hr(kap_vals[n - m], r)
            A += nu[m] * s * kap_vals[n - m]
            B -= nu[m] * s
            mass += nu[m]
        # tail: sum_{m>n} nu(m,r) * t = 1 - t * mass
        A += 1
        B -= mass
        A /= 2
        B /= 2
        t = math.exp(-harmonic(r).value)
        value = float(A) + float(B) * t
        return DtvResult(n, r, value, 0.0, exact_pair=(A, B))

    t = math.exp(-harmonic(r).value)
    terms = [nu[m] * abs(kap_vals[n - m] - t) for m in range(n + 1)]
    mass = math.fsum(nu[m] for m in range(n + 1))
    tail = max(1.0 - t * mass, 0.0)
    value = 0.5 * (math.fsum(terms) + tail)
    return DtvResult(n, r, value, 0.0)


# -- brute-force oracle over the truncated cycle-count support -----------

def _bounded_vectors(m: int, r: int):
    """Vectors (s_1..s_r) with sum j*s_j = m, as {j: s_j} dicts."""
    yield from exactcore._partitions(m, max_part=r)


def dtv_supremum_oracle(n: int, r: int) -> tuple[Fraction, Fraction]:
    """d_TV by the subset-supremum definition, as an exact (A, B) pair.

    sum over the reachable support of (P(k_r = s) - P(Z_r = s))^+ with
    P(k_r = s) = prod 1/(j^{s_j} s_j!) * kappa(n - m, r) and
    P(Z_r = s) = prod 1/(j^{s_j} s_j!) * e^{-H_r}.
    """
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    if r < n:
        kap = kappa_table(n, r, Backend.EXACT_RATIONAL, cross_check=False).values
    else:
        kap = [Fraction(1)] + [Fraction(0)] * n
    t = math.exp(-harmonic(r).value)
    A = Fraction(0)
    B = Fraction(0)
    for m in range(n + 1):
        km = kap[n - m]
        for vec in _bounded_vectors(m, r):
            w = Fraction(1)
            for j, s in vec.items():
                w /= Fraction(j) ** s * math.factorial(s)
            # positive part of w*(kappa - t); sign decided as in
            # _sign_vs_exp_neg_hr (e^{-H_r} is irrational, never a tie)
            diff = float(km) - t
            if abs(diff) < 1e-13:
                raise ArithmeticError("sign resolution too close to call")
            if diff > 0:
                A += w * km
                B -= w
    return A, B


# -- the limit function H(u) ---------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)

# The omega grid carries ~2e-14 absolute noise; past v ~ 11 the true
# |omega - e^-gamma| (~R(v)) lies below it, so deviations under this
# floor are treated as zero to keep H(u) meaningful at large u.
OMEGA_NOISE_FLOOR = 1e-12


def _gauss_panel(f, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * math.fsum(w * f(mid + half * x)
                            for x, w in zip(_GL_NODES, _GL_WEIGHTS))


def _split_points(lo: float, hi: float, extra) -> list[float]:
    pts = {lo, hi}
    k = math.ceil(lo)
    while k < hi:
        if k > lo:
            pts.add(float(k))
        k += 1
    for p in extra:
        if lo < p < hi:
            pts.add(p)
    return sorted(pts)


def dickman_total_integral(rho_grid: SpecialGrid, upper: float = 60.0) -> float:
    """integral_0^inf rho(t) dt, summed per unit panel until negligible."""
    total = 0.0
    k = 0.0
    while k < upper:
        inc = _gauss_panel(lambda t: dickman(t, rho_grid), k, k + 1.0)
        total += inc
        if inc < 1e-16 * total:
            break
        k += 1.0
    return total


def h_function(u: float, rho_grid: SpecialGrid, omega_grid: SpecialGrid,
               panel_width: float = 1.0) -> float:
    """H(u) = (1/2) int_0^{u-1} |omega(u-t) - e^-g| rho(t) dt
            + (e^-g / 2) int_{u-1}^inf rho(t) dt + rho(u)/2.

    Panels split at integer t, at integer u - t (omega kinks) and at
    sign changes of omega - e^-gamma; Gauss-Legendre inside each panel.
    """
    if u < 1.0:
        raise ValueError(f"H(u) needs u >= 1, got {u}")
    eg = math.exp(-EULER_GAMMA)
    zeros = buchstab_sign_changes(omega_grid, v_hi=u)
    # kinks of both functions, expressed on the t axis
    extra = [u - k for k in range(1, math.ceil(u) + 1)]
    extra += [u - z for z in zeros]

    def integrand(t: float) -> float:
        dev = abs(buchstab(u - t, omega_grid) - eg)
        if dev < OMEGA_NOISE_FLOOR:
            dev = 0.0
        return dev * dickman(t, rho_grid)

    part1 = 0.0
    if u > 1.0:
        pts = _split_points(0.0, u - 1.0, extra)
        refined = []
        for a, b in zip(pts[:-1], pts[1:]):
            m = math.ceil((b - a) / panel_width)
            refined.extend(a + (b - a) * i / m for i in range(m))
        refined.append(u - 1.0)
        part1 = math.fsum(_gauss_panel(integrand, a, b)
                          for a, b in zip(refined[:-1], refined[1:]))

    # tail integral of rho from u-1, panel per unit interval
    tail = 0.0
    a = u - 1.0
    while True:
        b = math.floor(a) + 1.0
        if b <= a:
            b = a + 1.0
        inc = _gauss_panel(lambda t: dickman(t, rho_grid), a, b)
        tail += inc
        if inc < 1e-16 * (tail + 1e-300) or b > u + 60.0:
            break
        a = b
    return 0.5 * part1 + 0.5 * eg * tail + 0.5 * dickman(u, rho_grid)


def build_h_grid(u_values, rho_grid: SpecialGrid,
                 omega_grid: SpecialGrid) -> HGrid:
    u_values = np.asarray(u_values, dtype=float)
    H = np.array([h_function(u, rho_grid, omega_grid) for u in u_values])
    return HGrid(u_values, H, buchstab_sign_changes(omega_grid))


def dtv_estimate(n: int, r: int, rho_grid: SpecialGrid,
                 omega_grid: SpecialGrid,
                 exact_ceiling: int = 20000) -> DtvResult:
    """H(u) estimate with the exact-series ratio when affordable.

    Valid range of the underlying expansion: sqrt(n log n) <= r <= n.
    """
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    u = n / r
    h = h_function(u, rho_grid, omega_grid)
    if n <= exact_ceiling:
        base = dtv_exact(n, r)
        return DtvResult(n, r, base.exact, base.truncation_mass,
                         h_estimate=h, emrp_ratio=base.exact / h)
    return DtvResult(n, r, math.nan, 0.0, h_estimate=h)


def dtv_nu_bound(n: int, r: int) -> float:
    """Upper envelope (up to a constant, documented as 1):

    (1/r) sum_{m=0}^{n-r-1} nu(m,r) nu(n-m,r)
    + (1/r) sum_{m>=n-r} nu(m,r) + nu(n,r).

    The infinite second sum equals e^{H_r} - sum_{m<n-r} nu(m,r) exactly
    by the normalization identity.
    """
    if not 5 <= r < n:
        raise ValueError(f"need 5 <= r < n, got r={r}, n={n}")
    nu = nu_table(n, r, Backend.FLOAT64)
    conv = math.fsum(nu[m] * nu[n - m] for m in range(0, n - r))
    head = math.fsum(nu[m] for m in range(0, n - r))
    tail = math.exp(harmonic(r).value) - head
    return conv / r + tail / r + nu[n]
