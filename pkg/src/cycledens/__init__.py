"""Densities of permutations with constrained cycle lengths.

Exact DP tables for nu(n, r) (no long cycles) and kappa(n, r) (no short
cycles), the Dickman/Buchstab special-function kernel, saddle-point
asymptotics across all (n, r) regimes, and the total variation distance
between truncated cycle counts and independent Poisson variables.
"""

from .exactcore import (Backend, CapacityError, DensityTable, Kind,
                        harmonic, kappa_table, nu_table, oracle_count)
from .specialfns import (EULER_GAMMA, SpecialGrid, big_i,
                         build_buchstab_grid, build_dickman_grid, buchstab,
                         dickman, xi, zeta0_r)
from .asymptotics import (Estimate, Regime, SaddlePoint, kappa_buchstab,
                          kappa_explicit_bound, nu_dickman, nu_log_expansion,
                          nu_saddle, select_regime, solve_saddle)
from .dtv import DtvResult, dtv_estimate, dtv_exact, dtv_nu_bound, h_function

__version__ = "0.1.0"
