"""
Address corpora: ingestion, per-chain normalization and the membership index.

A CorpusIndex answers contains() exactly: the Bloom prefilter rejects most
absent addresses in memory, and every prefilter hit is confirmed against the
sorted store on disk.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Union
import errno
import logging
import os

import httpx
import numpy as np

from app.core.config import settings
from app.core.errors import (
    ConfigError,
    CorpusMissing,
    DiskFull,
    EmptyInput,
    FileUnreadable,
    SourceError,
    SweepError,
)
from app.models.index_store import (
    BloomFilter,
    IndexFormatError,
    IndexMeta,
    SortedStore,
    index_paths,
)
from app.schemas.chains import ChainId
from app.services import codecs
from app.services.block_source import BlockSource

logger = logging.getLogger(__name__)

CHAIN_CODES = {chain: code for code, chain in enumerate(ChainId)}
MAX_ADDRESS_LENGTH = 128
_BUILD_BATCH = 1 << 20

_SEGWIT_HRPS = {ChainId.BTC: "bc", ChainId.LTC: "ltc"}


@dataclass(frozen=True, slots=True)
class RawAddressRecord:
    chain: ChainId
    text: str


@dataclass
class IngestStats:
    records: int = 0
    skipped: int = 0
    last_height: Optional[int] = None


def normalize(chain: ChainId, text: str) -> str:
    text = text.strip()
    if not text:
        raise EmptyInput("empty address")
    if chain is ChainId.BCH:
        try:
            return codecs.legacy_to_cashaddr(text)
        except SweepError:
            return text.lower().removeprefix(codecs.CASHADDR_PREFIX + ":")
    if chain is ChainId.ETH:
        body = text[2:] if text[:2].lower() == "0x" else text
        return "0x" + body.lower()
    hrp = _SEGWIT_HRPS.get(chain)
    if hrp and text[:len(hrp) + 1].lower() == hrp + "1":
        try:
            codecs.bech32_segwit_decode(hrp, text)
        except SweepError:
            return text
        return text.lower()
    return text


def lookup_form(chain: ChainId, derived: str) -> str:
    """Index form of a derived address; derivation output is canonical except for EIP-55 case."""
    return derived.lower() if chain is ChainId.ETH else derived


def _is_wellformed(text: str) -> bool:
    return (
        0 < len(text) <= MAX_ADDRESS_LENGTH
        and text.isascii()
        and text.isprintable()
        and not any(ch.isspace() for ch in text)
    )


def ingest_file(
    path: Union[str, Path],
    chain: ChainId,
    stats: Optional[IngestStats] = None,
) -> Iterator[RawAddressRecord]:
    """Records from a newline-delimited dump; the first tab column is the address."""
    try:
        handle = open(path, "r", encoding="utf-8", errors="replace")
    except OSError as e:
        raise FileUnreadable(f"cannot read corpus dump {path}: {e}") from e
    return _read_dump(handle, chain, stats if stats is not None else IngestStats(), str(path))


def _read_dump(handle, chain: ChainId, stats: IngestStats, name: str) -> Iterator[RawAddressRecord]:
    with handle:
        for line in handle:
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            text = line.split("\t", 1)[0].strip()
            if not _is_wellformed(text):
                stats.skipped += 1
                continue
            stats.records += 1
            yield RawAddressRecord(chain, text)
    if stats.skipped:
        logger.warning(f"Skipped {stats.skipped} malformed lines in {name}")


def _output_addresses(output: Dict[str, Any]) -> List[str]:
    script = output.get("scriptPubKey") or {}
    for holder in (script, output):
        if holder.get("address"):
            return [holder["address"]]
        if holder.get("addresses"):
            return [a for a in holder["addresses"] if a]
    return []


def extract_addresses(block: Dict[str, Any], chain: ChainId, stats: IngestStats) -> List[str]:
    """Every address in every output of every transaction of one block document."""
    found: List[str] = []
    txs = block.get("tx")
    if txs is None:
        txs = block.get("transactions") or []
    for tx in txs:
        if not isinstance(tx, dict):
            # getblock verbosity 1 lists txids only
            stats.skipped += 1
            continue
        if chain is ChainId.ETH or "vout" not in tx:
            for key in ("from", "to"):
                if tx.get(key):
                    found.append(tx[key])
                elif key == "to":
                    stats.skipped += 1
            continue
        for output in tx.get("vout") or []:
            addresses = _output_addresses(output)
            if addresses:
                found.extend(addresses)
            else:
                stats.skipped += 1
    return found


def ingest_blocks(
    source: BlockSource,
    chain: ChainId,
    heights: Iterable[int],
    stats: Optional[IngestStats] = None,
) -> Iterator[RawAddressRecord]:
    """Stream addresses over a height range; stats.last_height is the resume cursor."""
    stats = stats if stats is not None else IngestStats()
    for height in heights:
        try:
            block = source.get_block(height)
            addresses = extract_addresses(block, chain, stats)
        except SourceError as e:
            e.last_completed = stats.last_height
            raise
        except (httpx.HTTPError, AttributeError, KeyError, TypeError, ValueError) as e:
            raise SourceError(f"failed to read block: {e}", height, stats.last_height) from e
        for text in addresses:
            stats.records += 1
            yield RawAddressRecord(chain, text)
        stats.last_height = height
        logger.debug(f"Block {height}: {len(addresses)} addresses")


class CorpusIndex:
    """Immutable two-stage membership index for one chain."""

    def __init__(self, chain: ChainId, meta: IndexMeta, prefilter: BloomFilter, store: SortedStore, path: Path):
        self.chain = chain
        self.meta = meta
        self.prefilter = prefilter
        self.store = store
        self.path = path

    @property
    def count(self) -> int:
        return self.meta.count

    @property
    def fp_rate(self) -> float:
        return self.meta.fp_rate

    def prefilter_hit(self, normalized_address: str) -> bool:
        return normalized_address.encode("utf-8") in self.prefilter

    def contains(self, normalized_address: str) -> bool:
        item = normalized_address.encode("utf-8")
        return item in self.prefilter and item in self.store

    __contains__ = contains


def contains(index: CorpusIndex, normalized_address: str) -> bool:
    return index.contains(normalized_address)


def _unique_sorted(records: Iterable[RawAddressRecord], chain: ChainId) -> np.ndarray:
    parts: List[np.ndarray] = []
    batch: List[bytes] = []
    skipped = 0

    def flush():
        if batch:
            parts.append(np.unique(np.array(batch, dtype=bytes)))
            batch.clear()

    for record in records:
        if record.chain is not chain:
            skipped += 1
            continue
        try:
            batch.append(normalize(chain, record.text).encode("utf-8"))
        except EmptyInput:
            skipped += 1
            continue
        if len(batch) >= _BUILD_BATCH:
            flush()
    flush()
    if skipped:
        logger.warning(f"Skipped {skipped} records not usable for the {chain.value} index")
    if not parts:
        return np.empty(0, dtype="S1")
    return np.unique(np.concatenate(parts))


def build_index(
    records: Iterable[RawAddressRecord],
    chain: ChainId,
    fp_rate: Optional[float] = None,
    directory: Optional[Union[str, Path]] = None,
    name: Optional[str] = None,
) -> CorpusIndex:
    """Normalize, deduplicate and sort the records, then write meta, filter and store."""
    fp_rate = settings.FP_RATE if fp_rate is None else fp_rate
    if not 1e-9 <= fp_rate <= 0.1:
        raise ConfigError(f"fp_rate {fp_rate} is outside [1e-9, 0.1]")
    directory = Path(directory or settings.CORPUS_DIR)
    name = name or chain.value

    unique = _unique_sorted(records, chain)
    if len(unique) == 0:
        logger.warning(f"EmptyCorpus: no valid {chain.value} addresses, writing an empty index")
    prefilter = BloomFilter.build(unique.tolist(), fp_rate)
    paths = index_paths(directory, name)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        tmp_sorted = paths["sorted"].with_suffix(".sorted.tmp")
        width = SortedStore.write(tmp_sorted, unique)
        tmp_filter = paths["filter"].with_suffix(".filter.tmp")
        prefilter.write(tmp_filter)
        meta = IndexMeta(
            chain_code=CHAIN_CODES[chain],
            count=len(unique),
            fp_rate=fp_rate,
            filter_bits=prefilter.bits,
            hash_count=prefilter.hashes,
            width=width,
        )
        tmp_meta = paths["meta"].with_suffix(".meta.tmp")
        tmp_meta.write_bytes(meta.pack())
        os.replace(tmp_sorted, paths["sorted"])
        os.replace(tmp_filter, paths["filter"])
        os.replace(tmp_meta, paths["meta"])
    except OSError as e:
        if e.errno == errno.ENOSPC:
            raise DiskFull(f"no space left writing index {name} in {directory}") from e
        raise
    logger.info(f"Built {chain.value} index {paths['meta']}: {len(unique)} addresses, fp_rate {fp_rate}")
    return open_index(directory, chain, name)


def open_index(
    directory: Union[str, Path],
    chain: ChainId,
    name: Optional[str] = None,
    memory_budget: Optional[int] = None,
) -> CorpusIndex:
    name = name or chain.value
    paths = index_paths(directory, name)
    if not all(p.exists() for p in paths.values()):
        raise CorpusMissing(f"no complete {chain.value} index named {name!r} in {directory}")
    budget = settings.INDEX_MEMORY_BUDGET if memory_budget is None else memory_budget
    try:
        meta = IndexMeta.unpack(paths["meta"].read_bytes())
        if meta.chain_code != CHAIN_CODES[chain]:
            raise ConfigError(f"index {paths['meta']} was built for another chain")
        prefilter = BloomFilter.read(paths["filter"], memory_budget=budget)
        store = SortedStore.read(paths["sorted"])
    except IndexFormatError as e:
        raise ConfigError(f"corrupt index {paths['meta']}: {e}") from e
    if len(store) != meta.count:
        raise ConfigError(f"index {paths['meta']} count does not match its sorted store")
    return CorpusIndex(chain, meta, prefilter, store, paths["meta"])


def index_info(index: CorpusIndex) -> Dict[str, Any]:
    return {
        "chain": index.chain.value,
        "path": str(index.path),
        "count": index.count,
        "fp_rate": index.fp_rate,
        "filter_bits": index.meta.filter_bits,
        "hash_count": index.meta.hash_count,
        "record_width": index.meta.width,
        "filter_bytes": index.prefilter.nbytes,
    }
