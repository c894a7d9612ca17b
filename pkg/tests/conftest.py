import pathlib

import pytest

from gkmc.model import load_model_file

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def de_dicto():
    return load_model_file(FIXTURES / "de_dicto.gkm.json")


@pytest.fixture(scope="session")
def deadlock():
    return load_model_file(FIXTURES / "deadlock.gkm.json")


@pytest.fixture(scope="session")
def waitall():
    return load_model_file(FIXTURES / "waitall.gkm.json")


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)
