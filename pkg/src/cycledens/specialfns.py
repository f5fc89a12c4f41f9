"""Special-function kernel: xi, I(s), Dickman rho, Buchstab omega, zeta0, R.

The delay ODEs for rho and omega are integrated by the method of steps on
a uniform mesh (2^-10 per unit interval by default); within each unit
interval the delayed integrand is fully known on the aligned mesh of the
previous interval, so a cumulative composite-Simpson pass gives O(h^4)
knot values.  Large-v Dickman switches to the xi-based closed form.
"""

from __future__ import annotations

import cmath
import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

EULER_GAMMA = 0.5772156649015329

DEFAULT_MESH_STEP = 2.0 ** -10
DEFAULT_CROSSOVER = 10.0     # Dickman: asymptotic form beyond this
V1_CUTOFF = 10.0             # zeta0/R defined for v >= V1_CUTOFF
R_BELOW_CUTOFF = 1.0         # documented O(1) stand-in for R on [1, v1)
BIG_I_CAP = 700.0            # |s| cap: partial sums reach e^{|s|} scale

GRID_FORMAT_VERSION = 1


class ConvergenceError(Exception):
    """Iteration failed to converge within its budget."""


def euler_gamma_series(n: int) -> float:
    """H_n - log n - 1/(2n) + 1/(12 n^2); self-check route for gamma."""
    h = math.fsum(1.0 / j for j in range(1, n + 1))
    return h - math.log(n) - 0.5 / n + 1.0 / (12.0 * n * n)


@dataclass(frozen=True)
class XiValue:
    v: float
    xi: float
    xi_prime: float


def xi(v: float) -> XiValue:
    """Positive solution of e^xi = 1 + v*xi (xi(1) = 0).

    Guarded Newton inside the bracket (log v, 2 log v); the derivative
    comes from xi' = (1/v) * xi / (xi - 1 + 1/v).
    """
    if v < 1.0:
        raise ValueError(f"xi needs v >= 1, got {v}")
    if v == 1.0:
        return XiValue(1.0, 0.0, 2.0)   # limit of the derivative formula
    lo, hi = math.log(v), 2.0 * math.log(v)
    x = math.log(v) + math.log(math.log(v + 2.0))
    x = min(max(x, lo + 1e-18), hi - 1e-18) if hi > lo else lo
    for _ in range(100):
        f = math.expm1(x) - v * x
        fp = math.exp(x) - v
        if f > 0:
            hi = x
        else:
            lo = x
        step = f / fp if fp != 0 else 0.0
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-16 * (1.0 + abs(x)):
            x = x_new
            break
        x = x_new
    xp = (1.0 / v) * x / (x - 1.0 + 1.0 / v)
    return XiValue(v, x, xp)


def big_i(s: complex) -> complex:
    """I(s) = integral_0^s (e^t - 1)/t dt = sum_{k>=1} s^k / (k * k!).

    Entire; summed with compensated accumulation until the term drops
    below 1e-18 * (1 + |partial|).
    """
    s = complex(s)
    if abs(s) > BIG_I_CAP:
        raise ValueError(f"|s| capped at {BIG_I_CAP}, got {abs(s):.3g}")
    total = 0.0 + 0.0j
    comp = 0.0 + 0.0j
    power = 1.0 + 0.0j         # s^k / k!
    for k in range(1, 10000):
        power *= s / k
        term = power / k
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < 1e-18 * (1.0 + abs(total)):
            break
    return total


class GridFunction(Enum):
    DICKMAN = "dickman"
    BUCHSTAB = "buchstab"


@dataclass(frozen=True)
class SpecialGrid:
    function: GridFunction
    mesh_step: float
    v_start: float                       # 0.0 for Dickman, 1.0 for Buchstab
    knots: np.ndarray = field(repr=False)  # values at v_start + i*mesh_step
    v_max: float = 0.0
    asymptotic_crossover: float = DEFAULT_CROSSOVER

    @property
    def per_unit(self) -> int:
        return round(1.0 / self.mesh_step)


def _cumulative_simpson(g: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral of samples g on a uniform grid of step h.

    Pairwise Simpson for even indices; odd indices seeded by the 3-point
    open Newton-Cotes formula.  O(h^4) accurate for smooth g.
    """
    n = len(g)
    out = np.zeros(n)
    if n < 3:
        if n == 2:
            out[1] = 0.5 * h * (g[0] + g[1])
        return out
    pair = (h / 3.0) * (g[:-2] + 4.0 * g[1:-1] + g[2:])
    out[2::2] = np.cumsum(pair[::2])
    out[1] = (h / 12.0) * (5.0 * g[0] + 8.0 * g[1] - g[2])
    if n > 3:
        out[3::2] = out[1] + np.cumsum(pair[1::2])
    return out


def build_dickman_grid(v_max: float = 40.0,
                       mesh_step: float = DEFAULT_MESH_STEP,
                       crossover: float = DEFAULT_CROSSOVER) -> SpecialGrid:
    """Integrate v*rho'(v) = -rho(v-1) by the method of steps from rho=1 on [0,1].

    Each unit interval is advanced through the integrated (all-positive)
    form v*rho(v) = int_{v-1}^{v} rho(t) dt rather than the literal
    rho(k) - int form: subtracting two nearly equal integrals destroys
    all relative accuracy once rho decays below ~1e-13 (an absolute
    noise floor near 4e-16 that mesh refinement cannot remove).  The
    right half of the window overlaps the unknown segment, so the
    interval is solved by fixed-point iteration (contraction factor
    (v-k)/v < 1).
    """
    per = round(1.0 / mesh_step)
    if abs(per * mesh_step - 1.0) > 1e-12:
        raise ValueError("mesh_step must divide a unit interval evenly")
    n_units = math.ceil(v_max)
    vs = np.arange(n_units * per + 1) * mesh_step
    rho = np.ones(len(vs))
    for k in range(1, n_units):
        i0 = k * per
        seg_v = vs[i0:i0 + per + 1]
        delayed = rho[i0 - per:i0 + 1]               # rho on [k-1, k]
        # int_{v-1}^{k} rho: cumulative Simpson from the right edge
        left_part = _cumulative_simpson(delayed[::-1], mesh_step)[::-1]
        cur = np.full(per + 1, rho[i0])
        for _ in range(200):
            new = (left_part + _cumulative_simpson(cur, mesh_step)) / seg_v
            if np.max(np.abs(new - cur)) <= 1e-17 * np.max(np.abs(new)):
                cur = new
                break
            cur = new
        rho[i0:i0 + per + 1] = cur
    return SpecialGrid(GridFunction.DICKMAN, mesh_step, 0.0, rho,
                       float(n_units), crossover)


def build_buchstab_grid(v_max: float = 40.0,
                        mesh_step: float = DEFAULT_MESH_STEP) -> SpecialGrid:
    """Integrate (v*omega(v))' = omega(v-1) from omega = 1/v on [1, 2]."""
    per = round(1.0 / mesh_step)
    if abs(per * mesh_step - 1.0) > 1e-12:
        raise ValueError("mesh_step must divide a unit interval evenly")
    n_units = math.ceil(v_max) - 1
    vs = 1.0 + np.arange(n_units * per + 1) * mesh_step
    om = 1.0 / vs
    for k in range(1, n_units):
        i0 = k * per
        seg_v = vs[i0:i0 + per + 1]
        delayed = om[i0 - per:i0 + 1]                # omega on [k, k+1]
        vom = seg_v[0] * om[i0] + _cumulative_simpson(delayed, mesh_step)
        om[i0:i0 + per + 1] = vom / seg_v
    return SpecialGrid(GridFunction.BUCHSTAB, mesh_step, 1.0, om,
                       float(n_units + 1))


def _interp_cubic(grid: SpecialGrid, v: float) -> float:
    """Local 4-point Lagrange cubic, clamped inside one unit interval.

    The delay ODE solutions are smooth within each unit interval and have
    kinks only at integers, so the stencil never crosses an integer.
    """
    h = grid.mesh_step
    per = grid.per_unit
    t = (v - grid.v_start) / h
    i = int(t)
    i = min(max(i, 0), len(grid.knots) - 2)
    unit = i // per
    lo_b, hi_b = unit * per, min((unit + 1) * per, len(grid.knots) - 1)
    j = min(max(i - 1, lo_b), hi_b - 3) if hi_b - lo_b >= 3 else lo_b
    if hi_b - lo_b < 3:                   # degenerate short segment
        x0 = grid.v_start + i * h
        w = (v - x0) / h
        return float((1 - w) * grid.knots[i] + w * grid.knots[i + 1])
    xs = grid.v_start + (j + np.arange(4)) * h
    ys = grid.knots[j:j + 4]
    out = 0.0
    for a in range(4):
        w = 1.0
        for b in range(4):
            if a != b:
                w *= (v - xs[b]) / (xs[a] - xs[b])
        out += w * ys[a]
    return float(out)


def _exprel_deriv(s: float, m: int) -> float:
    """m-th derivative of (e^s - 1)/s, from the series sum_k s^k/(k+1)!."""
    total = 0.0
    for k in range(m, m + 400):
        c = 1.0
        for j in range(k - m + 1, k + 1):
            c *= j
        term = c * s ** (k - m) / math.factorial(k + 1)
        total += term
        if k > m + 5 and abs(term) < 1e-20 * (1.0 + abs(total)):
            break
    return total


def dickman_asymptotic(v: float, order: int = 2) -> float:
    """Closed form exp(gamma - v*xi + I(xi)) / sqrt(2*pi*(v + (1-v)/xi)).

    order=2 applies the next steepest-descent term
    1 + mu4/(8 mu2^2) - 5 mu3^2/(24 mu2^3) with mu_k the k-th derivative
    of (e^s - 1)/s at xi, cutting the relative error from ~0.5/v to
    O(1/v^2); order=1 is the bare leading form.
    """
    xv = xi(v)
    mu2 = v + (1.0 - v) / xv.xi if xv.xi > 0 else 1.0
    val = math.exp(EULER_GAMMA - v * xv.xi + big_i(xv.xi).real)
    val /= math.sqrt(2.0 * math.pi * mu2)
    if order >= 2 and xv.xi > 0:
        mu3 = _exprel_deriv(xv.xi, 2)
        mu4 = _exprel_deriv(xv.xi, 3)
        val *= 1.0 + mu4 / (8.0 * mu2 ** 2) - 5.0 * mu3 ** 2 / (24.0 * mu2 ** 3)
    return val


def dickman(v: float, grid: SpecialGrid | None = None) -> float:
    """rho(v): stepwise grid value up to the crossover, closed form beyond."""
    if v < 0.0:
        raise ValueError(f"dickman needs v >= 0, got {v}")
    if v <= 1.0:
        return 1.0
    crossover = grid.asymptotic_crossover if grid is not None else DEFAULT_CROSSOVER
    if grid is None or v > min(crossover, grid.v_max):
        return dickman_asymptotic(v)
    return _interp_cubic(grid, v)


def log_dickman(v: float, grid: SpecialGrid | None = None) -> float:
    """log rho(v); rho underflows doubles near v ~ 130, the log never does."""
    if v < 0.0:
        raise ValueError(f"dickman needs v >= 0, got {v}")
    if v <= 1.0:
        return 0.0
    crossover = grid.asymptotic_crossover if grid is not None else DEFAULT_CROSSOVER
    if grid is not None and v <= min(crossover, grid.v_max):
        return math.log(_interp_cubic(grid, v))
    xv = xi(v)
    mu2 = v + (1.0 - v) / xv.xi
    out = (EULER_GAMMA - v * xv.xi + big_i(xv.xi).real
           - 0.5 * math.log(2.0 * math.pi * mu2))
    mu3 = _exprel_deriv(xv.xi, 2)
    mu4 = _exprel_deriv(xv.xi, 3)
    return out + math.log1p(mu4 / (8.0 * mu2 ** 2)
                            - 5.0 * mu3 ** 2 / (24.0 * mu2 ** 3))


def buchstab(v: float, grid: SpecialGrid) -> float:
    """omega(v): 1/v on [1, 2], stepwise beyond, e^-gamma past the grid."""
    if v < 1.0:
        raise ValueError(f"buchstab needs v >= 1, got {v}")
    if v <= 2.0:
        return 1.0 / v
    if v > grid.v_max:
        return math.exp(-EULER_GAMMA)   # |omega - e^-gamma| <= 2 R(v) there
    return _interp_cubic(grid, v)


def buchstab_sign_changes(grid: SpecialGrid, v_hi: float | None = None) -> list[float]:
    """Zeros of omega(v) - e^-gamma located by knot scan plus bisection."""
    target = math.exp(-EULER_GAMMA)
    hi = grid.v_max if v_hi is None else min(v_hi, grid.v_max)
    vals = grid.knots - target
    zeros = []
    n_hi = int((hi - grid.v_start) / grid.mesh_step)
    sign = np.sign(vals[:n_hi + 1])
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in flips:
        a = grid.v_start + i * grid.mesh_step
        b = a + grid.mesh_step
        fa = _interp_cubic(grid, a) - target
        for _ in range(80):
            m = 0.5 * (a + b)
            fm = _interp_cubic(grid, m) - target
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
            if b - a < 1e-13:
                break
        zeros.append(0.5 * (a + b))
    return zeros


@dataclass(frozen=True)
class Zeta0:
    v: float
    zeta0: complex
    R: float
    log_r: float


def zeta0_r(v: float, v1: float = V1_CUTOFF) -> Zeta0:
    """Complex saddle zeta0(v) solving e^zeta = 1 - v*zeta, and R(v).

    Newton from the expansion xi + pi^2/(2 xi^2) - i*pi*xi/(xi-1); the
    iterate must stay within the disc |zeta - xi + i*pi| <= pi.
    """
    if v < v1:
        raise ValueError(
            f"zeta0_r needs v >= {v1}; below the cutoff R(v) is only O(1) "
            f"(use R_BELOW_CUTOFF)")
    xv = xi(v).xi
    z = complex(xv + math.pi ** 2 / (2.0 * xv * xv),
                -math.pi * xv / (xv - 1.0))
    center = complex(xv, -math.pi)
    for it in range(100):
        f = cmath.exp(z) - 1.0 + v * z
        if abs(f) <= 1e-12 * (1.0 + v * abs(z)):
            break
        fp = cmath.exp(z) + v
        z = z - f / fp
        if abs(z - center) > math.pi + 1e-9:
            raise ConvergenceError(
                f"zeta0 Newton escaped the disc at v={v} (iter {it})")
    else:
        raise ConvergenceError(f"zeta0 Newton did not converge at v={v}")
    resid = abs(cmath.exp(z) - 1.0 + v * z)
    if resid > 1e-10 * (1.0 + v * abs(z)):
        raise ConvergenceError(f"zeta0 residual {resid:.3g} too large at v={v}")
    # exp(-v*Re z) underflows doubles near v ~ 115, so keep the log too
    denom = z * cmath.sqrt(2.0 * math.pi * v * (1.0 - 1.0 / z))
    log_r = -v * z.real - big_i(z).real - math.log(abs(denom))
    r_val = math.exp(log_r) if log_r > -745.0 else 0.0
    return Zeta0(v, z, r_val, log_r)


def r_envelope(v: float, v1: float = V1_CUTOFF) -> float:
    """R(v) with the documented O(1) constant below the cutoff."""
    if v < 1.0:
        raise ValueError(f"R needs v >= 1, got {v}")
    if v < v1:
        return R_BELOW_CUTOFF
    return zeta0_r(v, v1).R


# -- grid serialization -------------------------------------------------

def _grid_checksum(grid: SpecialGrid) -> str:
    return hashlib.sha256(grid.knots.tobytes()).hexdigest()


def grid_cache_name(function: GridFunction, mesh_step: float, v_max: float) -> str:
    return f"{function.value}_h{mesh_step:.3e}_vmax{v_max:g}.json"


def save_grid(grid: SpecialGrid, path: str) -> None:
    payload = {
        "version": GRID_FORMAT_VERSION,
        "function": grid.function.value,
        "mesh_step": grid.mesh_step,
        "v_start": grid.v_start,
        "v_max": grid.v_max,
        "asymptotic_crossover": grid.asymptotic_crossover,
        "checksum": _grid_checksum(grid),
        "knots": [k.hex() for k in grid.knots.tolist()],   # bit-exact
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_grid(path: str) -> SpecialGrid:
    """Load a cached grid; raises ValueError on any corruption or mismatch."""
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("version") != GRID_FORMAT_VERSION:
        raise ValueError(f"grid cache version mismatch in {path}")
    knots = np.array([float.fromhex(k) for k in payload["knots"]])
    grid = SpecialGrid(GridFunction(payload["function"]),
                       payload["mesh_step"], payload["v_start"], knots,
                       payload["v_max"], payload["asymptotic_crossover"])
    if _grid_checksum(grid) != payload["checksum"]:
        raise ValueError(f"grid cache checksum mismatch in {path}")
    return grid
