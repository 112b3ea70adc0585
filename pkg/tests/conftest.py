"""Shared fixtures: one curve context and constants table per session."""

import numpy as np
import pytest

from abelops.constants import constants_table, curve_context
from abelops.verify import operator_bundle, run_all

DEFAULT_BRANCH = [0.0, 1.0, 2.0, 3.0, 4.0]


@pytest.fixture(scope="session")
def cc():
    return curve_context(DEFAULT_BRANCH)


@pytest.fixture(scope="session")
def table(cc):
    return constants_table(cc)


@pytest.fixture(scope="session")
def bundle(cc, table):
    return operator_bundle(cc, table)


@pytest.fixture(scope="session")
def all_results(cc):
    """The full verification run shared by the verify and acceptance tests."""
    return run_all(cc, regime="all", seed=42, grid=10)


@pytest.fixture(scope="session")
def results_by_name(all_results):
    return {r.name: r for r in all_results}


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(123)
