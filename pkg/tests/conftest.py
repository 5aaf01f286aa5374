from pathlib import Path

import pytest

from holereach.model import load_model

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "holereach" / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


@pytest.fixture
def load_fixture():
    return lambda name: load_model(fixture_path(name))
