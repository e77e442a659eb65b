"""Shared fixtures."""

import pytest

from haupt.config import PACKAGE_DATA, reset_settings
from haupt.services.catalog import Catalog
from haupt.services.moonshine import load_group
from haupt.utils.logger import setup_logging


SEED = 20240601


@pytest.fixture(autouse=True)
def _fresh_settings():
    setup_logging(level="WARNING")
    reset_settings()
    yield
    reset_settings()


@pytest.fixture(scope="session")
def catalog() -> Catalog:
    """The bundled catalog; one instance so expansions are cached across tests."""
    return Catalog.from_file(PACKAGE_DATA / "catalog.tsv", cache_size=64)


@pytest.fixture(scope="session")
def a5():
    return load_group(PACKAGE_DATA / "groups" / "a5.json")


@pytest.fixture(scope="session")
def a5_assignment() -> dict[str, str]:
    return {"1A": "1", "2A": "2+", "3A": "3|3", "5A": "5", "5B": "5"}
