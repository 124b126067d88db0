import pathlib
import sys

import pytest

HERE = pathlib.Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

REPO = HERE.parent
CODES = REPO / "codes"


@pytest.fixture(scope="session")
def bb72_path() -> pathlib.Path:
    return CODES / "bb_72_12_6.code"


@pytest.fixture(scope="session")
def bb144_path() -> pathlib.Path:
    return CODES / "bb_144_12_12.code"
