import json
import random
import string

import httpx
import numpy as np
import pytest

from app.core.errors import ConfigError, CorpusMissing, EmptyInput, FileUnreadable, SourceError
from app.models.index_store import BloomFilter, IndexMeta, SortedStore, filter_parameters, index_paths
from app.schemas.chains import AddressKind, ChainId
from app.services import codecs
from app.services.block_source import PagedBlockSource, RecordedBlockSource, RpcBlockSource
from app.services.corpus import (
    IngestStats,
    RawAddressRecord,
    build_index,
    contains,
    extract_addresses,
    index_info,
    ingest_blocks,
    ingest_file,
    normalize,
    open_index,
)
from app.services.derivation import derive, derive_all
from app.services.scalar_group import Q, Scalar
from tests.conftest import FIXTURES_DIR, K1_COMPRESSED, K1_ETH, K1_SEGWIT, K1_UNCOMPRESSED

NAMED = "1PSRcasBNEwPC2TWUB68wvQZHwXy4yqPQ3"


def random_addresses(rng, n):
    alphabet = string.ascii_letters + string.digits
    return ["1" + "".join(rng.choice(alphabet) for _ in range(33)) for _ in range(n)]


def records(chain, addresses):
    return [RawAddressRecord(chain, a) for a in addresses]


# normalize

def test_normalize_known_values():
    assert normalize(ChainId.BCH, "bitcoincash:qrmzrdndlfxpnkk3w5d5l7etnysnqfgk5yxsf6k0qq") == (
        "qrmzrdndlfxpnkk3w5d5l7etnysnqfgk5yxsf6k0qq"
    )
    assert normalize(ChainId.ETH, K1_ETH) == K1_ETH.lower()
    assert normalize(ChainId.BTC, K1_UNCOMPRESSED) == K1_UNCOMPRESSED
    assert normalize(ChainId.BTC, K1_SEGWIT.upper()) == K1_SEGWIT
    with pytest.raises(EmptyInput):
        normalize(ChainId.BTC, "  ")


def test_normalize_keeps_base58_that_looks_like_segwit(table):
    legacy = "LTC1CWf6G97eTAHT7F9TJErceah4YScBPL"
    assert codecs.base58check_decode(legacy).version == b"\x30"
    assert normalize(ChainId.LTC, legacy) == legacy
    segwit = derive(Scalar(1), ChainId.LTC, AddressKind.SEGWIT_V0, table).text
    assert normalize(ChainId.LTC, segwit.upper()) == segwit
    assert normalize(ChainId.BTC, "BC1QNOTBECH32") == "BC1QNOTBECH32"


def test_normalize_converts_legacy_bitcoin_cash():
    cashaddr = "qrmzrdndlfxpnkk3w5d5l7etnysnqfgk5yxsf6k0qq"
    assert normalize(ChainId.BCH, NAMED) == cashaddr
    assert normalize(ChainId.BCH, "BITCOINCASH:" + cashaddr.upper()) == cashaddr
    assert normalize(ChainId.BCH, cashaddr) == cashaddr


def test_normalize_is_idempotent(table):
    rng = random.Random(8)
    samples = [(ChainId.BTC, NAMED), (ChainId.LTC, "LTC1CWf6G97eTAHT7F9TJErceah4YScBPL"), (ChainId.BCH, NAMED)]
    for _ in range(20):
        k = Scalar(rng.randrange(1, Q))
        samples += [(a.chain, a.text) for a in derive_all(k, list(ChainId), table)]
        samples += [(a.chain, a.text.upper()) for a in derive_all(k, [ChainId.BTC, ChainId.LTC, ChainId.BCH], table)
                    if a.kind in (AddressKind.SEGWIT_V0, AddressKind.CASHADDR_COMPRESSED)]
    for chain, text in samples:
        once = normalize(chain, text)
        assert normalize(chain, once) == once


# ingestion

def test_ingest_file():
    stats = IngestStats()
    out = list(ingest_file(FIXTURES_DIR / "btc_dump.txt", ChainId.BTC, stats))
    assert [r.text for r in out] == [K1_UNCOMPRESSED, K1_COMPRESSED, NAMED]
    assert stats.records == 3 and stats.skipped == 0


def test_ingest_file_skips_malformed(tmp_path):
    dump = tmp_path / "dump.txt"
    dump.write_text(f"{K1_UNCOMPRESSED}\nnot an address\n{K1_COMPRESSED}\t7\n")
    stats = IngestStats()
    assert len(list(ingest_file(dump, ChainId.BTC, stats))) == 2
    assert stats.skipped == 1


def test_ingest_file_unreadable(tmp_path):
    with pytest.raises(FileUnreadable):
        ingest_file(tmp_path / "missing.txt", ChainId.BTC)


def test_ingest_recorded_blocks():
    stats = IngestStats()
    source = RecordedBlockSource(FIXTURES_DIR / "blocks")
    out = list(ingest_blocks(source, ChainId.BTC, [100], stats))
    assert [r.text for r in out] == [K1_UNCOMPRESSED, K1_COMPRESSED, K1_SEGWIT]
    assert stats.skipped == 1
    assert stats.last_height == 100


def test_ingest_reports_resume_height():
    stats = IngestStats()
    source = RecordedBlockSource(FIXTURES_DIR / "blocks")
    seen = []
    with pytest.raises(SourceError) as info:
        for record in ingest_blocks(source, ChainId.BTC, range(100, 103), stats):
            seen.append(record.text)
    assert info.value.height == 102
    assert info.value.last_completed == 101
    assert len(seen) == 4


def test_extract_eth_block():
    block = json.loads((FIXTURES_DIR / "eth_blocks" / "5.json").read_text())
    stats = IngestStats()
    found = extract_addresses(block, ChainId.ETH, stats)
    assert len(found) == 3 and found[0] == K1_ETH
    assert stats.skipped == 1


def _rpc_handler(blocks, calls, fail_first=0):
    def handler(request):
        calls.append(request)
        if len(calls) <= fail_first:
            return httpx.Response(503, text="busy")
        body = json.loads(request.content)
        if body["method"] == "getblockhash":
            return httpx.Response(200, json={"result": f"hash{body['params'][0]}", "error": None, "id": body["id"]})
        height = int(body["params"][0].removeprefix("hash"))
        return httpx.Response(200, json={"result": blocks[height], "error": None, "id": body["id"]})

    return handler


def test_rpc_block_source_with_retry():
    block = json.loads((FIXTURES_DIR / "blocks" / "100.json").read_text())
    calls = []
    source = RpcBlockSource(
        base_url="http://node:8332",
        token="secret",
        max_retries=3,
        pacing=0,
        backoff=0,
        transport=httpx.MockTransport(_rpc_handler({100: block}, calls, fail_first=1)),
    )
    out = list(ingest_blocks(source, ChainId.BTC, [100]))
    source.close()
    assert len(out) == 3
    assert len(calls) == 3
    assert calls[0].headers["Authorization"] == "Bearer secret"


def test_rpc_transport_failure_is_source_error():
    source = RpcBlockSource(
        base_url="http://node:8332",
        max_retries=2,
        pacing=0,
        backoff=0,
        transport=httpx.MockTransport(lambda request: httpx.Response(500, text="down")),
    )
    with pytest.raises(SourceError) as info:
        list(ingest_blocks(source, ChainId.BTC, [100]))
    assert info.value.height == 100
    assert info.value.last_completed is None


def test_paged_block_source_merges_pages():
    pages = {
        "1": {"height": 7, "totalPages": 2, "txs": [{"vout": [{"scriptPubKey": {"address": K1_COMPRESSED}}]}]},
        "2": {"height": 7, "totalPages": 2, "txs": [{"vout": [{"scriptPubKey": {"address": NAMED}}]}]},
    }

    def handler(request):
        assert request.url.path == "/api/block/7"
        return httpx.Response(200, json=pages[request.url.params["page"]])

    source = PagedBlockSource(base_url="http://explorer/api", pacing=0, transport=httpx.MockTransport(handler))
    out = [r.text for r in ingest_blocks(source, ChainId.BTC, [7])]
    assert out == [K1_COMPRESSED, NAMED]


# index

def test_build_index_deduplicates(tmp_path):
    addresses = [K1_UNCOMPRESSED, K1_COMPRESSED, K1_UNCOMPRESSED, NAMED, K1_COMPRESSED]
    index = build_index(records(ChainId.BTC, addresses), ChainId.BTC, 0.01, tmp_path)
    assert index.count == 3
    for address in addresses:
        assert contains(index, address)
    assert not contains(index, "1H1jFxaHFUNT9TrLzeJVhXPyiSLq6UecUy")


def test_empty_index(tmp_path):
    index = build_index([], ChainId.BTC, 0.01, tmp_path)
    assert index.count == 0
    assert not index.contains(K1_UNCOMPRESSED)
    reopened = open_index(tmp_path, ChainId.BTC)
    assert reopened.count == 0
    assert not reopened.contains(K1_UNCOMPRESSED)


def test_index_normalizes_on_build(tmp_path):
    index = build_index(records(ChainId.ETH, [K1_ETH]), ChainId.ETH, 0.01, tmp_path)
    assert index.contains(K1_ETH.lower())
    assert not index.contains(K1_ETH)


def test_golden_index_files(tmp_path):
    addresses = [NAMED, K1_UNCOMPRESSED, K1_COMPRESSED]
    build_index(records(ChainId.BTC, addresses), ChainId.BTC, 0.01, tmp_path)
    paths = index_paths(tmp_path, "btc")

    expected_meta = (
        b"SWMT" + bytes([1, 0, 0, 0])
        + (3).to_bytes(8, "little")
        + bytes.fromhex("7b14ae47e17a843f")
        + (64).to_bytes(8, "little")
        + (15).to_bytes(4, "little")
        + (34).to_bytes(4, "little")
    )
    assert paths["meta"].read_bytes() == expected_meta

    expected_sorted = (
        b"SWSX" + bytes([1, 0, 0, 0])
        + (34).to_bytes(4, "little")
        + (3).to_bytes(8, "little")
        + bytes(12)
        + K1_COMPRESSED.encode() + K1_UNCOMPRESSED.encode() + NAMED.encode()
    )
    assert paths["sorted"].read_bytes() == expected_sorted

    raw_filter = paths["filter"].read_bytes()
    assert raw_filter[:24] == b"SWBF" + bytes([1, 0, 0, 0]) + (64).to_bytes(8, "little") + (15).to_bytes(4, "little") + bytes(4)
    assert len(raw_filter) == 24 + 8


def test_rebuild_is_byte_identical(tmp_path):
    rng = random.Random(12)
    addresses = random_addresses(rng, 500)
    first, second = tmp_path / "a", tmp_path / "b"
    build_index(records(ChainId.BTC, addresses), ChainId.BTC, 0.001, first)
    build_index(records(ChainId.BTC, list(reversed(addresses)) + addresses[:50]), ChainId.BTC, 0.001, second)
    for part in ("meta", "filter", "sorted"):
        assert index_paths(first, "btc")[part].read_bytes() == index_paths(second, "btc")[part].read_bytes()


def test_filter_parameters():
    assert filter_parameters(0, 0.01) == (64, 1)
    assert filter_parameters(3, 0.01) == (64, 15)
    bits, hashes = filter_parameters(10**7, 1e-6)
    assert 287_000_000 < bits < 288_000_000
    assert hashes == 20


def test_meta_roundtrip():
    meta = IndexMeta(chain_code=6, count=10, fp_rate=1e-6, filter_bits=288, hash_count=20, width=42)
    assert IndexMeta.unpack(meta.pack()) == meta


def test_index_matches_set_oracle(tmp_path):
    rng = np.random.default_rng(11)
    values = rng.choice(10**15, size=2 * 10**5, replace=False)
    inserted = [f"1{v:033d}" for v in values[:10**5]]
    absent = [f"1{v:033d}" for v in values[10**5:]]
    index = build_index(records(ChainId.BTC, inserted), ChainId.BTC, 0.01, tmp_path)
    assert all(index.contains(a) for a in inserted)
    assert not any(index.contains(a) for a in absent)


def test_prefilter_positive_but_absent(tmp_path):
    rng = random.Random(5)
    inserted = random_addresses(rng, 1000)
    index = build_index(records(ChainId.BTC, inserted), ChainId.BTC, 0.1, tmp_path)
    members = set(inserted)
    collider = None
    for candidate in random_addresses(rng, 20000):
        if candidate not in members and index.prefilter_hit(candidate):
            collider = candidate
            break
    assert collider is not None
    assert not index.contains(collider)


def test_bloom_filter_never_false_negative():
    items = [f"addr-{i}".encode() for i in range(5000)]
    bloom = BloomFilter.build(items, 1e-3)
    assert all(item in bloom for item in items)


def test_sorted_store_lookup(tmp_path):
    values = np.array(sorted([b"alpha", b"beta", b"gamma"]), dtype="S5")
    path = tmp_path / "x.sorted"
    SortedStore.write(path, values)
    store = SortedStore.read(path)
    assert len(store) == 3
    assert b"beta" in store
    assert b"bet" not in store
    assert b"gammas" not in store


def test_open_index_errors(tmp_path):
    with pytest.raises(CorpusMissing):
        open_index(tmp_path, ChainId.BTC)
    build_index(records(ChainId.BTC, [K1_UNCOMPRESSED]), ChainId.BTC, 0.01, tmp_path)
    with pytest.raises(ConfigError):
        open_index(tmp_path, ChainId.ETH, name="btc")
    index_paths(tmp_path, "btc")["meta"].write_bytes(b"JUNK" + bytes(36))
    with pytest.raises(ConfigError):
        open_index(tmp_path, ChainId.BTC)


def test_fp_rate_bounds(tmp_path):
    with pytest.raises(ConfigError):
        build_index([], ChainId.BTC, 0.5, tmp_path)
    with pytest.raises(ConfigError):
        build_index([], ChainId.BTC, 1e-12, tmp_path)


def test_memory_mapped_prefilter(tmp_path):
    build_index(records(ChainId.BTC, [K1_UNCOMPRESSED, NAMED]), ChainId.BTC, 0.01, tmp_path)
    index = open_index(tmp_path, ChainId.BTC, memory_budget=0)
    assert index.contains(NAMED)
    assert not index.contains(K1_COMPRESSED)


def test_index_info(tmp_path):
    index = build_index(records(ChainId.BTC, [K1_UNCOMPRESSED]), ChainId.BTC, 0.01, tmp_path)
    info = index_info(index)
    assert info["chain"] == "btc"
    assert info["count"] == 1
    assert info["record_width"] == 34


@pytest.mark.slow
def test_false_positive_rate_at_scale(tmp_path):
    rng = np.random.default_rng(3)
    inserted = [f"1{v:033d}" for v in rng.choice(10**15, size=10**7, replace=False)]
    index = build_index(records(ChainId.BTC, inserted), ChainId.BTC, 1e-6, tmp_path)
    false_positives = sum(index.prefilter_hit(f"3{i:033d}") for i in range(10**6))
    assert false_positives / 10**6 <= 1e-5
