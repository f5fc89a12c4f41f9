"""Exact cycle-constrained permutation densities.

nu(n, r): fraction of permutations of S_n with every cycle length <= r.
kappa(n, r): fraction with every cycle length > r.

Both are power-series coefficients of exp(sum z^j/j) over the allowed
cycle lengths, computed by an O(n) sliding prefix-sum DP over densities
(values stay in [0, 1], no factorial blow-up).  A brute-force partition
oracle provides ground truth at small n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

RATIONAL_N_CAP = 300     # Fraction denominators grow ~ lcm(1..n) * n!
ORACLE_N_CAP = 25        # partition enumeration stays instant below this


class Kind(Enum):
    NO_LONG_CYCLES = "no_long_cycles"     # nu: all cycle lengths <= r
    NO_SHORT_CYCLES = "no_short_cycles"   # kappa: all cycle lengths > r


class Backend(Enum):
    FLOAT64 = "float64"
    EXACT_RATIONAL = "rational"


class CapacityError(Exception):
    """Requested size exceeds a configured exactness ceiling."""


class ConsistencyError(Exception):
    """Two independent evaluation routes disagree."""


@dataclass(frozen=True)
class DensityTable:
    kind: Kind
    r: int
    values: Sequence          # values[m] = density(m, r), m = 0..len-1
    backend: Backend

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"r must be positive, got {self.r}")

    def __getitem__(self, m: int):
        return self.values[m]

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class HarmonicValue:
    r: int
    value: float
    exact: Fraction | None = None


@dataclass(frozen=True)
class CycleTypeOracleResult:
    n: int
    constraint: tuple            # ("max_len", r) or ("min_len", r)
    count: int
    density: Fraction


def harmonic(r: int, exact: bool = False) -> HarmonicValue:
    """H_r = sum_{j<=r} 1/j, optionally as an exact rational."""
    if r < 1:
        raise ValueError(f"r must be positive, got {r}")
    if exact:
        h = sum(Fraction(1, j) for j in range(1, r + 1))
        return HarmonicValue(r, float(h), h)
    return HarmonicValue(r, math.fsum(1.0 / j for j in range(1, r + 1)))


def nu_table(n_max: int, r: int, backend: Backend = Backend.FLOAT64) -> DensityTable:
    """Table of nu(m, r) for m = 0..n_max.

    DP on a_m = [z^m] exp(sum_{j<=r} z^j/j):  m*a_m = sum_{j<=min(r,m)}
    a_{m-j}.  a_m equals nu(m, r) for every m (truncating the
    cycle-length set above m does not change [z^m]).

    Rational mode uses the O(n) sliding prefix-sum form of the DP; float
    mode sums the positive window directly (prefix differences cancel
    catastrophically once a_m decays below the cumulative sum's epsilon).
    """
    if r < 1:
        raise ValueError(f"r must be positive, got {r}")
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    if backend is Backend.EXACT_RATIONAL:
        if n_max > RATIONAL_N_CAP:
            raise CapacityError(
                f"rational backend capped at n <= {RATIONAL_N_CAP}, got {n_max}")
        one = Fraction(1)
        a = [one]
        prefix = [one]                   # prefix[m] = sum_{k<=m} a_k
        for m in range(1, n_max + 1):
            lo = m - r - 1               # m*a_m = S_{m-1} - S_{m-r-1}
            s = prefix[m - 1] - (prefix[lo] if lo >= 0 else 0)
            am = s / m
            a.append(am)
            prefix.append(prefix[-1] + am)
        return DensityTable(Kind.NO_LONG_CYCLES, r, a, backend)

    a = np.empty(n_max + 1)
    a[0] = 1.0
    for m in range(1, n_max + 1):
        a[m] = a[max(0, m - r):m].sum() / m
    return DensityTable(Kind.NO_LONG_CYCLES, r, a, backend)


def nu_log_values(n_max: int, r: int) -> list[float]:
    """log nu(m, r) for m = 0..n_max, safe against underflow.

    Direct O(n*r) log-space recurrence; intended for small r where the
    linear-space table underflows (e.g. r = 2, n = 10^5).
    """
    if r < 1:
        raise ValueError(f"r must be positive, got {r}")
    logs = [0.0]
    for m in range(1, n_max + 1):
        terms = [logs[m - j] for j in range(1, min(r, m) + 1)]
        hi = max(terms)
        logs.append(hi + math.log(math.fsum(math.exp(t - hi) for t in terms))
                    - math.log(m))
    return logs


def _kappa_dp(n: int, r: int, backend: Backend) -> list:
    """b_m = [z^m] exp(sum_{j=r+1}^{n} z^j/j) for m = 0..n.

    b_m = kappa(m, r) for every m <= n since terms with j > m never reach
    the coefficient of z^m.  DP: m*b_m = S_{m-r-1} (prefix sums of b;
    the j > n cutoff never binds for m <= n).
    """
    one = Fraction(1) if backend is Backend.EXACT_RATIONAL else 1.0
    zero = one - one
    b = [one]
    prefix = [one]
    for m in range(1, n + 1):
        lo = m - r - 1
        s = prefix[lo] if lo >= 0 else zero
        bm = s / m if backend is Backend.EXACT_RATIONAL else s / float(m)
        b.append(bm)
        prefix.append(prefix[-1] + bm)
    return b


def _kappa_recurrence(n: int, r: int, backend: Backend) -> list:
    """Independent route: kappa(m, r) = 1/m + (1/m) sum_{r<j<m-r} kappa(j, r)."""
    one = Fraction(1) if backend is Backend.EXACT_RATIONAL else 1.0
    zero = one - one
    b = [one] + [zero] * n
    prefix = [zero] * (n + 1)            # prefix[k] = sum_{r<j<=k} b_j
    for m in range(1, n + 1):
        hi = m - r - 1                   # sum over r < j < m-r
        s = prefix[hi] if hi > r else zero
        if m > r:
            b[m] = (one + s) / m if backend is Backend.EXACT_RATIONAL \
                else (1.0 + s) / float(m)
        prefix[m] = prefix[m - 1] + (b[m] if m > r else zero)
    return b


def kappa_table(n: int, r: int, backend: Backend = Backend.FLOAT64,
                cross_check: bool = True) -> DensityTable:
    """Table of kappa(m, r) for m = 0..n (kappa(0, r) = 1 by convention).

    The DP route is cross-checked against the classical recurrence
    kappa(n, r) = 1/n + (1/n) sum_{r<j<n-r} kappa(j, r); disagreement is
    an internal error (exact match in rational mode).
    """
    if r < 1:
        raise ValueError(f"r must be positive, got {r}")
    if r >= n:
        raise ValueError(f"need r < n, got r={r}, n={n}")
    if backend is Backend.EXACT_RATIONAL and n > RATIONAL_N_CAP:
        raise CapacityError(
            f"rational backend capped at n <= {RATIONAL_N_CAP}, got {n}")

    b = _kappa_dp(n, r, backend)
    if cross_check:
        b2 = _kappa_recurrence(n, r, backend)
        if backend is Backend.EXACT_RATIONAL:
            if b != b2:
                raise ConsistencyError(
                    f"kappa DP and recurrence disagree at n={n}, r={r}")
        else:
            for m in range(n + 1):
                tol = 1e-12 * (abs(b[m]) + 1e-300)
                if abs(b[m] - b2[m]) > tol:
                    raise ConsistencyError(
                        f"kappa routes differ at m={m}: {b[m]} vs {b2[m]}")
    return DensityTable(Kind.NO_SHORT_CYCLES, r, b, backend)


def _partitions(n: int, max_part: int | None = None) -> Iterator[dict[int, int]]:
    """Yield partitions of n as {part: multiplicity} dicts."""
    if max_part is None or max_part > n:
        max_part = n
    if n == 0:
        yield {}
        return
    for p in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - p, p):
            out = dict(rest)
            out[p] = out.get(p, 0) + 1
            yield out


def oracle_count(n: int, constraint: tuple,
                 ceiling: int = ORACLE_N_CAP) -> CycleTypeOracleResult:
    """Brute-force count via enumeration of cycle types (partitions of n).

    constraint is ("max_len", r) -- all parts <= r -- or ("min_len", r) --
    all parts >= r.  count = sum over admissible partitions of
    n! / prod(j^{s_j} s_j!), an exact integer.
    """
    if not 1 <= n <= ceiling:
        raise CapacityError(f"oracle needs 1 <= n <= {ceiling}, got {n}")
    mode, bound = constraint
    if mode not in ("max_len", "min_len"):
        raise ValueError(f"unknown constraint {mode!r}")

    nfact = math.factorial(n)
    total = Fraction(0)
    for part in _partitions(n):
        parts = part.keys()
        if mode == "max_len" and max(parts, default=0) > bound:
            continue
        if mode == "min_len" and min(parts, default=n) < bound:
            continue
        w = Fraction(1)
        for j, s in part.items():
            w /= Fraction(j) ** s * math.factorial(s)
        total += w
    count = total * nfact
    assert count.denominator == 1
    return CycleTypeOracleResult(n, constraint, int(count), total)


def nu_mass_table(r: int, tol: float = 1e-12, n_hint: int = 0) -> DensityTable:
    """Extend a float nu table until e^{-H_r} * sum_m nu(m, r) >= 1 - tol.

    sum_m nu(m, r) e^{-H_r} is the total mass of sum_{j<=r} j Z_j, so the
    stopping rule bounds any tail contribution by tol.
    """
    if not 0 < tol <= 1e-6:
        raise ValueError(f"tol must be in (0, 1e-6], got {tol}")
    w = math.exp(-harmonic(r).value)
    cap = max(n_hint, 2 * r + 16) + 1
    a = np.empty(cap)
    a[0] = 1.0
    mass = w
    m = 0
    target = cap - 1
    while mass < 1.0 - tol or m < target:
        m += 1
        if m >= len(a):
            a = np.concatenate([a, np.empty(len(a))])
        a[m] = a[max(0, m - r):m].sum() / m
        mass += w * a[m]
    return DensityTable(Kind.NO_LONG_CYCLES, r, a[:m + 1], Backend.FLOAT64)
