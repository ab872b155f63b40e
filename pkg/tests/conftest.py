import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from finact.model import table1_params  # noqa: E402


@pytest.fixture
def p():
    return table1_params()


@pytest.fixture(scope="session")
def table1_table():
    from finact.spectral import build_frequency_table

    return build_frequency_table(table1_params())
