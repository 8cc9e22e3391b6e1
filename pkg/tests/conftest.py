from pathlib import Path
import os

import pytest

from app.schemas.chains import ChainId
from app.services.corpus import RawAddressRecord, build_index
from app.services.curve import get_table

TESTS_DIR = Path(__file__).parent
VECTORS_DIR = TESTS_DIR / "vectors"
FIXTURES_DIR = TESTS_DIR / "fixtures"

K1_UNCOMPRESSED = "1EHNa6Q4Jz2uvNExL497mE43ikXhwF6kZm"
K1_COMPRESSED = "1BgGZ9tcN4rm9KBzDn7KprQz87SZ26SAMH"
K1_SEGWIT = "bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t4"
K1_ETH = "0x7E5F4552091A69125d5DfCb7b8C2659029395Bdf"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale test, set SWEEP_RUN_SLOW=1 to run")


def pytest_collection_modifyitems(config, items):
    if os.environ.get("SWEEP_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set SWEEP_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def read_vectors(name: str):
    """(input bytes or text, expected) pairs from tests/vectors/<name>."""
    pairs = []
    for line in (VECTORS_DIR / name).read_text(encoding="ascii").splitlines():
        if not line.strip():
            continue
        left, expected = line.split("\t")
        pairs.append((left, expected))
    return pairs


@pytest.fixture(scope="session")
def table():
    return get_table(4)


@pytest.fixture
def make_corpus(tmp_path):
    """Build indices in a temporary corpus directory: make_corpus({chain: [addresses]})."""
    directory = tmp_path / "corpus"

    def _make(addresses_by_chain, fp_rate=1e-6):
        for chain, addresses in addresses_by_chain.items():
            chain = ChainId(chain)
            build_index((RawAddressRecord(chain, a) for a in addresses), chain, fp_rate, directory)
        return directory

    return _make
