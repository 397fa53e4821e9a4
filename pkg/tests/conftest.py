import pytest

from npcforge.gifts import ItemCatalog
from npcforge.grammar import LocationWhitelist


@pytest.fixture(scope="session")
def whitelist() -> LocationWhitelist:
    return LocationWhitelist.bundled()


@pytest.fixture(scope="session")
def catalog() -> ItemCatalog:
    return ItemCatalog.bundled()
