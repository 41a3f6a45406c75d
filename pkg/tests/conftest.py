import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from liftproof.cnf import CnfFormula, complete_bipartite, gen_php, php_2_1


# Small unsatisfiable formulas on at most three variables, widths one and two.
SMALL_UNSAT = (
    CnfFormula(3, [(1, 2), (1, -2), (-1, 3), (-1, -3)]),
    CnfFormula(3, [(1,), (-1, 2), (-2, 3), (-3,)]),
    CnfFormula(3, [(1, 2), (1, -2), (-1, 2), (-1, -2)]),
    CnfFormula(3, [(1, 2), (-1, 2), (-2, 3), (-2, -3)]),
    CnfFormula(2, [(1,), (-1,)]),
)


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long enumeration or sampling runs')


@pytest.fixture
def php21():
    return php_2_1()


@pytest.fixture
def php32():
    return gen_php(complete_bipartite(3))


@pytest.fixture(params=range(len(SMALL_UNSAT)), ids=lambda k: f'unsat{k}')
def small_unsat(request):
    return SMALL_UNSAT[request.param]
