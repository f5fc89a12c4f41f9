"""Shared fixtures: the Dickman/Buchstab grids are built once per session."""

import pytest

from cycledens.specialfns import build_buchstab_grid, build_dickman_grid


@pytest.fixture(scope="session")
def rho_grid():
    return build_dickman_grid(40.0)


@pytest.fixture(scope="session")
def omega_grid():
    return build_buchstab_grid(40.0)
