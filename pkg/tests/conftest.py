import warnings

import pytest

from fptlevy import (
    LsbmSpec,
    QuadratureConfig,
    SpaceTimeGrid,
    VarianceGamma,
    build_kernel_table,
)


@pytest.fixture(scope="session")
def set1():
    return LsbmSpec(beta=0.2, subordinator=VarianceGamma(nu=1.0))


@pytest.fixture(scope="session")
def set2():
    return LsbmSpec(beta=-0.2, subordinator=VarianceGamma(nu=2.0))


@pytest.fixture(scope="session")
def qcfg():
    return QuadratureConfig()


@pytest.fixture(scope="session")
def grid50():
    return SpaceTimeGrid.build(T=5.0, n_t=50, X=10.0, n_x=10, anchor=0.5)


def _quiet_table(lsbm, grid):
    # the coarse default grid trips the row-mass advisory; irrelevant here
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_kernel_table(lsbm, grid)


@pytest.fixture(scope="session")
def table1(set1, grid50):
    return _quiet_table(set1, grid50)


@pytest.fixture(scope="session")
def table2(set2, grid50):
    return _quiet_table(set2, grid50)
