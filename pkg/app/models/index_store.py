"""
On-disk layout of a corpus index.

Three files share a base name; every header is little-endian and starts with a
4-byte magic and a format version byte.

  <name>.meta    40 bytes  "SWMT" u8 version, u8 chain code, 2 pad,
                           u64 count, f64 fp_rate, u64 filter bits,
                           u32 hash count, u32 record width
  <name>.filter  24 bytes  "SWBF" u8 version, 3 pad, u64 bits, u32 hashes,
                           4 pad; then ceil(bits / 8) bytes, bit i at
                           byte i >> 3, mask 1 << (i & 7)
  <name>.sorted  32 bytes  "SWSX" u8 version, 3 pad, u32 record width,
                           u64 count, 12 pad; then count records of
                           width bytes, NUL padded, strictly ascending
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union
import hashlib
import math
import mmap
import os
import struct

import numpy as np

FORMAT_VERSION = 1

META_MAGIC = b"SWMT"
FILTER_MAGIC = b"SWBF"
SORTED_MAGIC = b"SWSX"

META_HEADER = struct.Struct("<4sBB2xQdQII")
FILTER_HEADER = struct.Struct("<4sB3xQI4x")
SORTED_HEADER = struct.Struct("<4sB3xIQ12x")

_MASK64 = (1 << 64) - 1
_HASH_BATCH = 1 << 20


class IndexFormatError(ValueError):
    pass


@dataclass(frozen=True)
class IndexMeta:
    chain_code: int
    count: int
    fp_rate: float
    filter_bits: int
    hash_count: int
    width: int

    def pack(self) -> bytes:
        return META_HEADER.pack(
            META_MAGIC,
            FORMAT_VERSION,
            self.chain_code,
            self.count,
            self.fp_rate,
            self.filter_bits,
            self.hash_count,
            self.width,
        )

    @classmethod
    def unpack(cls, data: bytes) -> "IndexMeta":
        if len(data) < META_HEADER.size:
            raise IndexFormatError("truncated meta file")
        magic, version, chain_code, count, fp_rate, bits, hashes, width = META_HEADER.unpack(
            data[:META_HEADER.size]
        )
        _check_magic(magic, version, META_MAGIC)
        return cls(chain_code, count, fp_rate, bits, hashes, width)


def _check_magic(magic: bytes, version: int, expected: bytes) -> None:
    if magic != expected:
        raise IndexFormatError(f"bad magic {magic!r}, expected {expected!r}")
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"unsupported format version {version}")


def filter_parameters(n: int, fp_rate: float) -> tuple:
    """Optimal (bits, hash count) of a Bloom filter for n items."""
    if n <= 0:
        return 64, 1
    bits = max(64, math.ceil(-n * math.log(fp_rate) / math.log(2) ** 2))
    hashes = max(1, round(bits / n * math.log(2)))
    return bits, hashes


def _hash_pair(item: bytes) -> tuple:
    digest = hashlib.blake2b(item, digest_size=16).digest()
    return int.from_bytes(digest[:8], "little"), int.from_bytes(digest[8:], "little") | 1


class BloomFilter:
    """Double-hashed Bloom filter over byte strings (blake2b, 128-bit split)."""

    def __init__(self, bits: int, hashes: int, data: Optional[Union[bytes, mmap.mmap, np.ndarray]] = None):
        self.bits = bits
        self.hashes = hashes
        self._data = data if data is not None else bytes((bits + 7) // 8)

    @classmethod
    def build(cls, items: Sequence[bytes], fp_rate: float) -> "BloomFilter":
        bits, hashes = filter_parameters(len(items), fp_rate)
        plane = np.zeros(bits, dtype=bool)
        modulus = np.uint64(bits)
        for offset in range(0, len(items), _HASH_BATCH):
            pairs = [_hash_pair(item) for item in items[offset:offset + _HASH_BATCH]]
            h1 = np.fromiter((a for a, _ in pairs), dtype=np.uint64, count=len(pairs))
            h2 = np.fromiter((b for _, b in pairs), dtype=np.uint64, count=len(pairs))
            for i in range(hashes):
                # uint64 arithmetic wraps, matching the & _MASK64 in positions()
                plane[(h1 + np.uint64(i) * h2) % modulus] = True
        packed = np.packbits(plane, bitorder="little")
        return cls(bits, hashes, packed.tobytes())

    def positions(self, item: bytes) -> Iterable[int]:
        h1, h2 = _hash_pair(item)
        for i in range(self.hashes):
            yield ((h1 + i * h2) & _MASK64) % self.bits

    def __contains__(self, item: bytes) -> bool:
        data = self._data
        return all(data[pos >> 3] >> (pos & 7) & 1 for pos in self.positions(item))

    @property
    def nbytes(self) -> int:
        return (self.bits + 7) // 8

    def write(self, path: Path) -> None:
        with open(path, "wb") as fh:
            fh.write(FILTER_HEADER.pack(FILTER_MAGIC, FORMAT_VERSION, self.bits, self.hashes))
            fh.write(bytes(self._data[: self.nbytes]))

    @classmethod
    def read(cls, path: Path, memory_budget: Optional[int] = None) -> "BloomFilter":
        """Load into memory, or memory-map when the filter exceeds memory_budget."""
        with open(path, "rb") as fh:
            header = fh.read(FILTER_HEADER.size)
            if len(header) < FILTER_HEADER.size:
                raise IndexFormatError("truncated filter file")
            magic, version, bits, hashes = FILTER_HEADER.unpack(header)
            _check_magic(magic, version, FILTER_MAGIC)
            nbytes = (bits + 7) // 8
            if memory_budget is not None and nbytes > memory_budget:
                mapped = mmap.mmap(fh.fileno(), 0, access=mmap.ACCESS_READ)
                view = memoryview(mapped)[FILTER_HEADER.size:FILTER_HEADER.size + nbytes]
                return cls(bits, hashes, view)
            data = fh.read(nbytes)
        if len(data) != nbytes:
            raise IndexFormatError("truncated filter body")
        return cls(bits, hashes, data)


class SortedStore:
    """Strictly ascending fixed-width records, memory-mapped, binary searched."""

    def __init__(self, records: np.ndarray, width: int):
        self.records = records
        self.width = width

    def __len__(self) -> int:
        return int(self.records.shape[0])

    def __contains__(self, item: bytes) -> bool:
        if not item or len(item) > self.width or len(self) == 0:
            return False
        needle = np.bytes_(item)
        i = int(np.searchsorted(self.records, needle))
        return i < len(self) and self.records[i] == needle

    @staticmethod
    def write(path: Path, records: np.ndarray) -> int:
        width = records.dtype.itemsize if len(records) else 0
        with open(path, "wb") as fh:
            fh.write(SORTED_HEADER.pack(SORTED_MAGIC, FORMAT_VERSION, width, len(records)))
            if len(records):
                fh.write(np.ascontiguousarray(records).tobytes())
        return width

    @classmethod
    def read(cls, path: Path) -> "SortedStore":
        with open(path, "rb") as fh:
            header = fh.read(SORTED_HEADER.size)
        if len(header) < SORTED_HEADER.size:
            raise IndexFormatError("truncated sorted store")
        magic, version, width, count = SORTED_HEADER.unpack(header)
        _check_magic(magic, version, SORTED_MAGIC)
        if count == 0:
            return cls(np.empty(0, dtype="S1"), width)
        expected = SORTED_HEADER.size + width * count
        if os.path.getsize(path) != expected:
            raise IndexFormatError(f"sorted store size mismatch, expected {expected} bytes")
        records = np.memmap(path, dtype=f"S{width}", mode="r", offset=SORTED_HEADER.size, shape=(count,))
        return cls(records, width)


def index_paths(directory: Union[str, Path], name: str) -> dict:
    directory = Path(directory)
    return {
        "meta": directory / f"{name}.meta",
        "filter": directory / f"{name}.filter",
        "sorted": directory / f"{name}.sorted",
    }
