from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def testdata_path() -> Path:
    TEST_DIR = Path(__file__).parent
    return TEST_DIR / "data/"


from .fixtures_data import *  # noqa F403
from .fixtures_data import override_environment  # noqa E402


override_environment()
