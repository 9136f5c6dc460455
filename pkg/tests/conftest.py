import os

import pytest

from src.slp import parse_slp
from src.tm import parse_tm
from src.ram import parse_ram
from src.utils import read_text

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")


def fixture_path(*parts: str) -> str:
    return os.path.join(FIXTURES, *parts)


@pytest.fixture
def load_tm():
    return lambda name: parse_tm(read_text(fixture_path("tm", f"{name}.tm")))


@pytest.fixture
def load_slp():
    return lambda name: parse_slp(read_text(fixture_path(f"{name}.slp")))


@pytest.fixture
def load_ram():
    return lambda name: parse_ram(read_text(fixture_path("ram", f"{name}.ram")))
