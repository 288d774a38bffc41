import pytest

import chronos

# desk-scale reference configuration shared by the unit tests; the
# acceptance module builds the full-size grids itself
REF_P_MIN, REF_P_MAX = 0.5, 12.0


@pytest.fixture(scope="session")
def ref_spec():
    return chronos.GaussianStateSpec(p0=4.0, sigma_p=0.25, x0=-8.0)


@pytest.fixture(scope="session")
def grid512():
    return chronos.make_grid(REF_P_MIN, REF_P_MAX, 512)


@pytest.fixture(scope="session")
def phi512(grid512, ref_spec):
    return chronos.gaussian_state(ref_spec, grid512)
