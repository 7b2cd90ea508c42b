import os
import sys

import pytest

HERE = os.path.dirname(__file__)
sys.path.insert(0, HERE)

from pdmodcheck.system_model import load_pms  # noqa: E402

FIXTURES = os.path.join(HERE, "fixtures")


@pytest.fixture(scope="session")
def coffee():
    return load_pms(os.path.join(FIXTURES, "coffee.pms"))
