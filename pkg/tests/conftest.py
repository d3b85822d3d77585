import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rmdirac import (ShootConfig, SymmetryKind, bound_window, canonical_params,
                     enumerate_levels, oracle_eigenvalues, pekeris_coeffs,
                     refutation_params)

settings.register_profile(
    "ci", deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def canonical():
    return canonical_params()


@pytest.fixture(scope="session")
def refutation():
    return refutation_params()


@pytest.fixture(scope="session")
def canonical_pekeris(canonical):
    return pekeris_coeffs(canonical.alpha, canonical.r_e)


@pytest.fixture(scope="session")
def canonical_window(canonical, canonical_pekeris):
    return bound_window(canonical, SymmetryKind.spin, canonical_pekeris)


@pytest.fixture(scope="session")
def canonical_levels(canonical, canonical_pekeris):
    return enumerate_levels(canonical, SymmetryKind.spin, canonical_pekeris)


@pytest.fixture(scope="session")
def canonical_oracle(canonical, canonical_pekeris, canonical_window):
    return oracle_eigenvalues(canonical, SymmetryKind.spin, canonical_pekeris,
                              canonical_window, ShootConfig(steps=6000))


def rel_diffs(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.abs(a - b) / np.abs(b)
