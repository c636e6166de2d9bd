"""
Shared fixtures: scaling functions and kernels are built once per session.
"""
import os
import sys

import pytest

# Ensure project root is in path
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from src.kernel import ReproducingKernel  # noqa: E402
from src.scaling_engine import builtin_filter, cascade_build  # noqa: E402


@pytest.fixture(scope="session")
def haar():
    return cascade_build(builtin_filter("haar"), depth=10)


@pytest.fixture(scope="session")
def d4():
    return cascade_build(builtin_filter("d4"), depth=10)


@pytest.fixture(scope="session")
def d6():
    return cascade_build(builtin_filter("d6"), depth=10)


@pytest.fixture(scope="session")
def haar_kernel(haar):
    return ReproducingKernel(haar)


@pytest.fixture(scope="session")
def d4_kernel(d4):
    return ReproducingKernel(d4)


@pytest.fixture(scope="session")
def d6_kernel(d6):
    return ReproducingKernel(d6)


@pytest.fixture(scope="session")
def d8():
    return cascade_build(builtin_filter("d8"), depth=10)


@pytest.fixture(scope="session")
def d8_fine():
    """D8 at depth 16, for finite differences well below the default grid."""
    return cascade_build(builtin_filter("d8"), depth=16)


@pytest.fixture(scope="session")
def d8_fine_kernel(d8_fine):
    return ReproducingKernel(d8_fine)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: runs a full pipeline or a depth-16 cascade")
