import numpy as np
import pytest

from meshsched.netgraph import Network
from meshsched.rfcore import RadioParams

# six-node layout used for the two-tier and broadcast examples
SIX_NODES = ((-40, 5), (0, 0), (95, 0), (135, 0), (-75, 0), (0, -75))
# four-node chain used for the SINR-graph walk-through
CHAIN4 = SIX_NODES[:4]
SGLS_PICKS = [(1, 2), (2, 3), (3, 4), (3, 2)]


@pytest.fixture
def expt1():
    return RadioParams.from_db(10, 4, -90, 20, 10)


@pytest.fixture
def expt1_noint():
    return RadioParams.from_db(10, 4, -90, 20)


@pytest.fixture
def six_net(expt1):
    return Network(SIX_NODES, expt1)


@pytest.fixture
def chain4(expt1_noint):
    return Network(CHAIN4, expt1_noint)


@pytest.fixture
def line_pairs(expt1_noint):
    # three transmit/receive pairs along a line
    return Network(((-360, 0), (-450, 0), (90, 0), (0, 0), (360, 0), (450, 0)), expt1_noint)


@pytest.fixture
def two_pairs(expt1_noint):
    return Network(((0, 0), (50, 0), (220, 0), (170, 0)), expt1_noint)


@pytest.fixture
def bcast_net(expt1_noint):
    return Network(((0, 0), (-80, 0), (90, 0), (280, 0), (200, 0), (370, 0)), expt1_noint)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
