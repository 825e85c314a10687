import os
import tempfile
from copy import deepcopy

# Keep the suite away from the real user data directory; must happen before hyperstat
# is imported anywhere
os.environ.setdefault("HYPERSTAT_DATA_DIR", tempfile.mkdtemp(prefix="hyperstat-tests-"))

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from hyperstat import configuration  # noqa: E402
from hyperstat.problems import registry_get  # noqa: E402
from hyperstat.rng import make_rng  # noqa: E402


@pytest.fixture(autouse=True)
def restore_config():
    saved = deepcopy(configuration.config)
    yield
    configuration.config.clear()
    configuration.config.update(saved)


@pytest.fixture
def rng():
    return make_rng(20240611)


@pytest.fixture
def abs_phi():
    def phi(z):
        return abs(float(np.asarray(z)[0]))

    return phi


@pytest.fixture
def p1():
    return registry_get("P1-line")


@pytest.fixture
def p1_coercive():
    return registry_get("P1-line-coercive")


@pytest.fixture
def p2():
    return registry_get("P2-sin-interval")


@pytest.fixture
def p3():
    return registry_get("P3-box-counterexample")


@pytest.fixture
def p4():
    return registry_get("P4-graphline")


@pytest.fixture
def p5():
    return registry_get("P5-plane-coercive")
