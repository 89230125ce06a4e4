import numpy as np
import pytest

from cohsim.field import GridSpec, default_grid


@pytest.fixture(scope="session")
def grid512() -> GridSpec:
    return default_grid()


@pytest.fixture(scope="session")
def grid128() -> GridSpec:
    # same 6 mm window at reduced resolution, for cheap end-to-end runs
    return GridSpec.from_extent(128, 6e-3)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
