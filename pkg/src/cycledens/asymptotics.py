"""Saddle-point solver and asymptotic estimates for nu(n, r) and kappa(n, r).

Everything exponential-scale is carried in log space; Estimate.value is
materialized only when it fits a double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from . import specialfns
from .exactcore import harmonic
from .specialfns import (EULER_GAMMA, SpecialGrid, buchstab, dickman,
                         log_dickman, r_envelope, xi)

NEAR_ONE = 1e-4    # below this |x-1|, geometric closed forms cancel badly


class Regime(Enum):
    SADDLE_EXACT = "saddle_exact"
    LOG_EXPANSION = "log_expansion"
    DICKMAN_PLAIN = "dickman_plain"
    DICKMAN_CORRECTED = "dickman_corrected"
    BUCHSTAB_MAIN = "buchstab_main"
    EXPLICIT_BOUND = "explicit_bound"
    EPS_DELTA_BOUND = "eps_delta_bound"
    NU_LINKED_BOUND = "nu_linked_bound"
    SMALL_R_BOUND = "small_r_bound"
    AT_EXPLICIT = "arratia_tavare"
    AW_BOUND = "weingartner"


@dataclass(frozen=True)
class Estimate:
    log_value: float
    regime: Regime
    error_order: str
    valid: bool
    explicit_constant: bool = True   # False: known only up to a constant

    @property
    def value(self) -> float:
        # exp underflows to 0.0 / overflows to inf outside double range
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return math.inf


@dataclass(frozen=True)
class SaddlePoint:
    n: int
    r: int
    x: float
    lambda1: float    # sum x^j           (= n by construction)
    lambda2: float    # sum j x^j
    lambda3: float    # sum j^2 x^j
    lambda4: float    # sum j^3 x^j


@dataclass(frozen=True)
class KappaBoundParams:
    alpha: float
    E: float
    bound: float
    log_bound: float


def _power_sum(x: float, r: int, k: int) -> float:
    """sum_{j=1}^{r} j^{k-1} x^j by direct summation."""
    return math.fsum(j ** (k - 1) * x ** j for j in range(1, r + 1))


def _geom_sum(x: float, r: int) -> float:
    """sum_{j<=r} x^j, switching to direct summation near x = 1."""
    if abs(x - 1.0) < NEAR_ONE:
        return math.fsum(x ** j for j in range(1, r + 1))
    return (x ** (r + 1) - x) / (x - 1.0)


def solve_saddle(n: int, r: int) -> SaddlePoint:
    """Positive root of sum_{j<=r} x^j = n plus the derived sums lambda_k."""
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    u = n / r
    if r == n:
        x = 1.0
    elif r == 1:
        x = float(n)
    else:
        lo = u ** (1.0 / r)
        hi = u ** (2.0 / (r + 1))
        x = 0.5 * (lo + hi)
        for _ in range(200):
            f = _geom_sum(x, r) - n
            if f > 0:
                hi = x
            else:
                lo = x
            fp = _power_sum(x, r, 2) / x
            x_new = x - f / fp
            if not lo <= x_new <= hi:
                x_new = 0.5 * (lo + hi)
            if abs(x_new - x) <= 1e-15 * x:
                x = x_new
                break
            x = x_new
        resid = abs(_geom_sum(x, r) - n)
        if resid > 1e-10 * n:
            raise specialfns.ConvergenceError(
                f"saddle residual {resid:.3g} at n={n}, r={r}")
    lam2 = (r * r * u + r * (x - u) / (x - 1.0)) if abs(x - 1.0) >= NEAR_ONE \
        else _power_sum(x, r, 2)
    return SaddlePoint(n, r, x, _geom_sum(x, r), lam2,
                       _power_sum(x, r, 3), _power_sum(x, r, 4))


def saddle_series_x(n: int, r: int) -> float:
    """Series cross-check for the saddle x, valid for 2 <= r <= log n.

    x ~ n^{1/r} - 1/r - sum_{N=2}^{r} G_N n^{-(N-1)/r} + n^{-1+1/r}/r
    with G_N = Gamma(N+(N-1)/r) / ((N-1) Gamma(N+1) Gamma((N-1)/r)).
    """
    if not 2 <= r <= math.log(n):
        raise ValueError(f"series needs 2 <= r <= log n, got r={r}, n={n}")
    total = n ** (1.0 / r) - 1.0 / r + n ** (-1.0 + 1.0 / r) / r
    for N in range(2, r + 1):
        q = (N - 1) / r
        g = math.exp(math.lgamma(N + q) - math.lgamma(N + 1) - math.lgamma(q))
        total -= g / (N - 1) * n ** (-q)
    return total


def nu_saddle(n: int, r: int) -> Estimate:
    """Saddle formula exp(sum x^j/j) / (x^n sqrt(2 pi lambda2)), log space.

    Valid on all of 1 <= r <= n (range extension of the core result);
    relative error O(r/n).
    """
    sp = solve_saddle(n, r)
    s = math.fsum(sp.x ** j / j for j in range(1, r + 1))
    log_v = s - n * math.log(sp.x) - 0.5 * math.log(2.0 * math.pi * sp.lambda2)
    return Estimate(log_v, Regime.SADDLE_EXACT, "r/n", True)


def nu_log_expansion(n: int, r: int) -> Estimate:
    """Gamma-coefficient expansion of log nu(n, r), sharp for r <= log n.

    log nu = -log sqrt(2 pi n r) - (n log n)/r + n/r
             + sum_{k<r} d_rk n^{(r-k)/r} + d_rr,
    d_rk = Gamma(k+k/r) / ((r-k) Gamma(k+1) Gamma(1+k/r)),
    d_rr = -(1/r) sum_{j=2..r} 1/j.
    """
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    logn = math.log(n)
    log_v = -0.5 * math.log(2.0 * math.pi * n * r) - n * logn / r + n / r
    for k in range(1, r):
        q = k / r
        d = math.exp(math.lgamma(k + q) - math.lgamma(k + 1)
                     - math.lgamma(1.0 + q)) / (r - k)
        log_v += d * n ** ((r - k) / r)
    log_v += -(1.0 / r) * math.fsum(1.0 / j for j in range(2, r + 1))
    return Estimate(log_v, Regime.LOG_EXPANSION, "n^(-1/r)", r <= logn)


def nu_dickman(n: int, r: int, grid: SpecialGrid | None = None,
               corrected: bool = False) -> Estimate:
    """Dickman-regime estimate rho(u), optionally with the exp(u xi/(2r)) factor.

    Plain form valid for sqrt(n log n) <= r <= n; the corrected form for
    n^{1/3} (log n)^{2/3} <= r (upper bound extended to n).
    """
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    u = n / r
    log_v = log_dickman(u, grid)
    logn = math.log(n)
    if corrected:
        log_v += u * xi(u).xi / (2.0 * r)
        valid = r >= n ** (1.0 / 3.0) * logn ** (2.0 / 3.0)
        return Estimate(log_v, Regime.DICKMAN_CORRECTED,
                        "u*log^2(u+1)/r^2 + 1/u", valid)
    valid = r >= math.sqrt(n * logn)
    return Estimate(log_v, Regime.DICKMAN_PLAIN, "u*log(u+1)/r", valid)


def kappa_buchstab(n: int, r: int, grid: SpecialGrid) -> Estimate:
    """Main term e^{-H_r + gamma} * omega(u); valid for sqrt(n log n) <= r < n."""
    if not 1 <= r < n:
        raise ValueError(f"need 1 <= r < n, got r={r}, n={n}")
    u = n / r
    log_v = -harmonic(r).value + EULER_GAMMA + math.log(buchstab(u, grid))
    valid = r >= math.sqrt(n * math.log(n))
    return Estimate(log_v, Regime.BUCHSTAB_MAIN,
                    "R(u)*u^(3/2)*log^2(u+1)/r^2", valid)


def _log_add(a: float, b: float) -> float:
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def kappa_explicit_bound(n: int, r: int, alpha: float) -> KappaBoundParams:
    """Fully explicit bound on |kappa(n,r) - e^{-H_r}| for r < n/2, alpha > 1.

    Both terms evaluated verbatim in log space:
      pi e^4 a^{2r-n+3/2} / (n^2 (a-1)^2) * exp(sum (a^j-2)/j + E(r,a))
    + 4 e a^{2r-n+2} / (pi n^2 r (a-1)^3) * exp(-a(a^r-1)/(2r(a-1)) - H_r).
    """
    if alpha <= 1.0:
        raise ValueError(f"need alpha > 1, got {alpha}")
    if not 1 <= r < n / 2:
        raise ValueError(f"need 1 <= r < n/2, got r={r}, n={n}")
    la = math.log(alpha)
    s = math.fsum((alpha ** j - 2.0) / j for j in range(1, r + 1))
    bracket = math.pi ** -2 / (1.0 + (r * alpha - r) ** 2) - alpha ** (-r / 2.0)
    e_term = (-(2.0 / r) * alpha ** (r + 1) / (alpha - 1.0) * max(bracket, 0.0)
              + min(2.0 * r * la, 2.0 * math.log(math.e * r)))
    log_t1 = (math.log(math.pi) + 4.0 + (2 * r - n + 1.5) * la
              - 2.0 * math.log(n) - 2.0 * math.log(alpha - 1.0) + s + e_term)
    log_t2 = (math.log(4.0) + 1.0 + (2 * r - n + 2.0) * la - math.log(math.pi)
              - 2.0 * math.log(n) - math.log(r) - 3.0 * math.log(alpha - 1.0)
              - alpha * (alpha ** r - 1.0) / (2.0 * r * (alpha - 1.0))
              - harmonic(r).value)
    log_b = _log_add(log_t1, log_t2)
    bound = math.exp(log_b) if log_b < 700 else math.inf
    return KappaBoundParams(alpha, e_term, bound, log_b)


def kappa_explicit_bound_min(n: int, r: int,
                             grid_points: int = 32) -> KappaBoundParams:
    """Minimize the explicit bound over a log grid of alpha in [u^{1/r}, u^{2/r}]."""
    u = n / r
    lo = math.log(u) / r
    best = None
    for i in range(grid_points):
        la = lo * (1.0 + i / (grid_points - 1.0))
        alpha = math.exp(la)
        if alpha <= 1.0:
            alpha = 1.0 + 1e-9
        cand = kappa_explicit_bound(n, r, alpha)
        if best is None or cand.log_bound < best.log_bound:
            best = cand
    return best


def kappa_error_bounds(n: int, r: int, grid: SpecialGrid | None = None,
                       eps: float = 0.1, delta: float = 0.1) -> list[Estimate]:
    """Labeled error envelopes on |kappa(n,r) - e^{-H_r}| for comparison runs.

    Only the Arratia-Tavare bound and the explicit alpha-bound carry fully
    specified constants; the rest are order envelopes.
    """
    if not 1 <= r < n:
        raise ValueError(f"need 1 <= r < n, got r={r}, n={n}")
    u = n / r
    logn = math.log(n)
    lu1 = math.log(u + 1.0)
    out = []

    # rho(u)/r * exp(-2u(1-delta)/(pi^2 log^2(1+u)))
    log_v = (log_dickman(u, grid) - math.log(r)
             - 2.0 * u * (1.0 - delta) / (math.pi ** 2 * lu1 ** 2))
    out.append(Estimate(log_v, Regime.EPS_DELTA_BOUND, "O_eps_delta(1)",
                        r >= logn ** 3, explicit_constant=False))

    # nu(n,r)/r * exp(-u^{1-4/r}(1-eps)/(4 pi^2 log^2(u+1)));  r in {2,3,4}
    # falls back to nu(n,r) * n^{5/2}
    log_nu = nu_saddle(n, r).log_value
    if r >= 5:
        log_v = (log_nu - math.log(r)
                 - u ** (1.0 - 4.0 / r) * (1.0 - eps) / (4.0 * math.pi ** 2 * lu1 ** 2))
    else:
        log_v = log_nu + 2.5 * logn
    out.append(Estimate(log_v, Regime.NU_LINKED_BOUND, "O_eps(1)",
                        r >= 2, explicit_constant=False))

    # exp(-(n/r) log(n/e) + n/log n + 3n/log^2 n), for 2 <= r <= log n
    log_v = -u * (logn - 1.0) + n / logn + 3.0 * n / logn ** 2
    out.append(Estimate(log_v, Regime.SMALL_R_BOUND, "O(1)",
                        2 <= r <= logn, explicit_constant=False))

    # Arratia-Tavare: sqrt(2 pi |u|) 2^{|u|-1}/(|u|-1)! + 1/|u|! + 3 (e/u)^u
    fu = math.floor(u)
    log_at = _log_add(
        _log_add(0.5 * math.log(2.0 * math.pi * fu) + (fu - 1) * math.log(2.0)
                 - math.lgamma(fu), -math.lgamma(fu + 1)),
        math.log(3.0) + u * (1.0 - math.log(u)))
    out.append(Estimate(log_at, Regime.AT_EXPLICIT, "explicit", True))

    # Weingartner: (u/e)^{-u} / r^2
    log_v = -u * (math.log(u) - 1.0) - 2.0 * math.log(r)
    out.append(Estimate(log_v, Regime.AW_BOUND, "O(1)",
                        r <= n / logn, explicit_constant=False))

    if r < n / 2:
        out.append(Estimate(kappa_explicit_bound_min(n, r).log_bound,
                            Regime.EXPLICIT_BOUND, "explicit", True))
    return out


def select_regime(n: int, r: int, quantity: str = "nu",
                  grid: SpecialGrid | None = None,
                  buchstab_grid: SpecialGrid | None = None) -> Estimate:
    """Dispatch to the estimate whose stated range contains (n, r)."""
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    logn = math.log(n) if n > 1 else 1.0
    if quantity == "nu":
        if r <= logn:
            return nu_log_expansion(n, r)
        return nu_saddle(n, r)
    if quantity == "kappa":
        if r <= logn:
            bounds = kappa_error_bounds(n, r, grid)
            return next(b for b in bounds if b.regime is Regime.SMALL_R_BOUND)
        if r >= math.sqrt(n * logn) and r < n:
            if buchstab_grid is None:
                raise ValueError("buchstab grid required for this regime")
            return kappa_buchstab(n, r, buchstab_grid)
        if r < n / 2:
            best = kappa_explicit_bound_min(n, r)
            return Estimate(best.log_bound, Regime.EXPLICIT_BOUND, "explicit", True)
        # n/2 <= r < n: exact trivial value 1/n
        return Estimate(-logn, Regime.BUCHSTAB_MAIN, "exact", True)
    raise ValueError(f"unknown quantity {quantity!r}")


def r_bound_check(v: float, grid: SpecialGrid | None = None) -> tuple[float, float]:
    """(R(v), rho(v)) pair; R should be exponentially smaller for large v."""
    return r_envelope(v), dickman(v, grid)
