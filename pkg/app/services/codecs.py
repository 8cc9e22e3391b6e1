"""
Hash primitives and address string encodings.

Keccak-256 here is the original submission padding (0x01) that Ethereum uses,
not SHA3-256 (0x06). Bech32 follows BIP-173 (witness v0 only) and CashAddr
follows the Bitcoin Cash address spec, so outputs match on-chain addresses.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import hashlib

import base58
from Crypto.Hash import RIPEMD160, keccak

from app.core.errors import (
    BadAddress,
    BadAlphabet,
    BadChecksum,
    BadHashLength,
    BadLength,
    BadProgramLength,
)


# Digests

def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def ripemd160(data: bytes) -> bytes:
    return RIPEMD160.new(data).digest()


def keccak256(data: bytes) -> bytes:
    return keccak.new(digest_bits=256, data=data).digest()


# Base58Check

BASE58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_BASE58_SET = frozenset(BASE58_ALPHABET)


@dataclass(frozen=True)
class VersionedPayload:
    version: bytes
    payload: bytes

    def __post_init__(self):
        if len(self.version) not in (1, 2):
            raise BadLength(f"version prefix must be 1 or 2 bytes, got {len(self.version)}")
        if len(self.payload) != 20:
            raise BadLength(f"payload must be 20 bytes, got {len(self.payload)}")


def base58check_encode(vp: VersionedPayload) -> str:
    return base58.b58encode_check(vp.version + vp.payload).decode("ascii")


def base58check_decode(s: str) -> VersionedPayload:
    if not s or any(ch not in _BASE58_SET for ch in s):
        raise BadAlphabet(f"{s!r} is not a base58 string")
    try:
        raw = base58.b58decode_check(s)
    except ValueError as e:
        raise BadChecksum(f"base58check checksum mismatch for {s!r}") from e
    if len(raw) == 21:
        return VersionedPayload(raw[:1], raw[1:])
    if len(raw) == 22:
        return VersionedPayload(raw[:2], raw[2:])
    raise BadLength(f"decoded base58check body has {len(raw)} bytes")


# Shared 5-bit machinery

BECH32_CHARSET = "qpzry9x8gf2tvdw0s3jn54khce6mua7l"
_CHARSET_REV = {ch: i for i, ch in enumerate(BECH32_CHARSET)}


def convertbits(data: Sequence[int], frombits: int, tobits: int, pad: bool = True) -> Optional[List[int]]:
    """General power-of-2 base conversion; None when the input is not canonical."""
    acc = 0
    bits = 0
    ret: List[int] = []
    maxv = (1 << tobits) - 1
    max_acc = (1 << (frombits + tobits - 1)) - 1
    for value in data:
        if value < 0 or value >> frombits:
            return None
        acc = ((acc << frombits) | value) & max_acc
        bits += frombits
        while bits >= tobits:
            bits -= tobits
            ret.append((acc >> bits) & maxv)
    if pad:
        if bits:
            ret.append((acc << (tobits - bits)) & maxv)
    elif bits >= frombits or ((acc << (tobits - bits)) & maxv):
        return None
    return ret


def _to_charset(text: str) -> List[int]:
    try:
        return [_CHARSET_REV[ch] for ch in text]
    except KeyError as e:
        raise BadAddress(f"character {e.args[0]!r} is outside the bech32 alphabet") from None


def _reject_mixed_case(text: str) -> str:
    if text.lower() != text and text.upper() != text:
        raise BadAddress("mixed-case address")
    return text.lower()


# Bech32 (BIP-173)

_BECH32_GEN = (0x3B6A57B2, 0x26508E6D, 0x1EA119FA, 0x3D4233DD, 0x2A1462B3)


def _bech32_polymod(values: Sequence[int]) -> int:
    chk = 1
    for v in values:
        top = chk >> 25
        chk = (chk & 0x1FFFFFF) << 5 ^ v
        for i in range(5):
            chk ^= _BECH32_GEN[i] if (top >> i) & 1 else 0
    return chk


def _bech32_hrp_expand(hrp: str) -> List[int]:
    return [ord(x) >> 5 for x in hrp] + [0] + [ord(x) & 31 for x in hrp]


def _bech32_checksum(hrp: str, data: Sequence[int]) -> List[int]:
    polymod = _bech32_polymod(_bech32_hrp_expand(hrp) + list(data) + [0] * 6) ^ 1
    return [(polymod >> 5 * (5 - i)) & 31 for i in range(6)]


def bech32_segwit_encode(hrp: str, witness_version: int, program: bytes) -> str:
    if witness_version != 0:
        raise BadAddress("only witness version 0 is supported")
    if len(program) != 20:
        raise BadProgramLength(f"witness program must be 20 bytes, got {len(program)}")
    data = [witness_version] + convertbits(program, 8, 5)
    combined = data + _bech32_checksum(hrp, data)
    return hrp + "1" + "".join(BECH32_CHARSET[d] for d in combined)


def bech32_segwit_decode(hrp: str, address: str) -> Tuple[int, bytes]:
    if any(ord(x) < 33 or ord(x) > 126 for x in address):
        raise BadAddress("address contains characters outside printable ASCII")
    address = _reject_mixed_case(address)
    pos = address.rfind("1")
    if pos < 1 or pos + 7 > len(address) or len(address) > 90:
        raise BadAddress("malformed bech32 string")
    found_hrp = address[:pos]
    if found_hrp != hrp.lower():
        raise BadAddress(f"human-readable part {found_hrp!r} is not {hrp!r}")
    data = _to_charset(address[pos + 1:])
    if _bech32_polymod(_bech32_hrp_expand(found_hrp) + data) != 1:
        raise BadChecksum(f"bech32 checksum mismatch for {address!r}")
    data = data[:-6]
    if not data:
        raise BadAddress("missing witness version")
    program = convertbits(data[1:], 5, 8, False)
    if program is None or not 2 <= len(program) <= 40:
        raise BadProgramLength("invalid witness program")
    if data[0] != 0:
        raise BadAddress("only witness version 0 is supported")
    if len(program) not in (20, 32):
        raise BadProgramLength(f"v0 program must be 20 or 32 bytes, got {len(program)}")
    return data[0], bytes(program)


# CashAddr

CASHADDR_PREFIX = "bitcoincash"
CASHADDR_P2PKH = 0
CASHADDR_P2SH = 1

_CASHADDR_GEN = (
    (0x01, 0x98F2BC8E61),
    (0x02, 0x79B76D99E2),
    (0x04, 0xF33E5FB3C4),
    (0x08, 0xAE2EABE2A8),
    (0x10, 0x1E4F43E470),
)


def _cashaddr_polymod(values: Sequence[int]) -> int:
    chk = 1
    for value in values:
        top = chk >> 35
        chk = ((chk & 0x07FFFFFFFF) << 5) ^ value
        for bit, gen in _CASHADDR_GEN:
            if top & bit:
                chk ^= gen
    return chk ^ 1


def _cashaddr_prefix_expand(prefix: str) -> List[int]:
    return [ord(x) & 0x1F for x in prefix] + [0]


def cashaddr_encode(
    prefix: str,
    type_: int,
    hash_: bytes,
    with_prefix: bool = False,
) -> str:
    """Encode a 160-bit hash; the bare 'q...' form unless with_prefix is set."""
    if len(hash_) != 20:
        raise BadHashLength(f"cashaddr hash must be 20 bytes, got {len(hash_)}")
    if type_ not in (CASHADDR_P2PKH, CASHADDR_P2SH):
        raise BadAddress(f"unsupported cashaddr type {type_}")
    prefix = prefix.lower()
    version = type_ << 3  # size code 0 = 160 bits
    payload = convertbits(bytes([version]) + hash_, 8, 5)
    poly = _cashaddr_polymod(_cashaddr_prefix_expand(prefix) + payload + [0] * 8)
    checksum = [(poly >> 5 * (7 - i)) & 0x1F for i in range(8)]
    body = "".join(BECH32_CHARSET[d] for d in payload + checksum)
    return f"{prefix}:{body}" if with_prefix else body


def cashaddr_decode(address: str, default_prefix: str = CASHADDR_PREFIX) -> Tuple[str, int, bytes]:
    """Decode 'prefix:body' or a bare body; returns (prefix, type, hash)."""
    address = _reject_mixed_case(address)
    prefix, sep, body = address.rpartition(":")
    if not sep:
        prefix = default_prefix
    data = _to_charset(body)
    if len(data) < 9:
        raise BadAddress("cashaddr body too short")
    if _cashaddr_polymod(_cashaddr_prefix_expand(prefix) + data) != 0:
        raise BadChecksum(f"cashaddr checksum mismatch for {address!r}")
    raw = convertbits(data[:-8], 5, 8, False)
    if not raw:
        raise BadAddress("invalid cashaddr padding")
    version, hash_ = raw[0], bytes(raw[1:])
    if version & 0x80:
        raise BadAddress("reserved version bit set")
    if version & 0x07 != 0 or len(hash_) != 20:
        raise BadHashLength(f"only 160-bit cashaddr hashes are supported, got {len(hash_)} bytes")
    return prefix, version >> 3, hash_


def legacy_to_cashaddr(address: str, with_prefix: bool = False) -> str:
    vp = base58check_decode(address)
    if vp.version == b"\x00":
        type_ = CASHADDR_P2PKH
    elif vp.version == b"\x05":
        type_ = CASHADDR_P2SH
    else:
        raise BadAddress(f"version {vp.version.hex()} is not a Bitcoin legacy address")
    return cashaddr_encode(CASHADDR_PREFIX, type_, vp.payload, with_prefix=with_prefix)


def cashaddr_to_legacy(address: str) -> str:
    _, type_, hash_ = cashaddr_decode(address)
    version = b"\x00" if type_ == CASHADDR_P2PKH else b"\x05"
    return base58check_encode(VersionedPayload(version, hash_))


# EIP-55

def eip55_checksum(addr20: bytes) -> str:
    if len(addr20) != 20:
        raise BadLength(f"ethereum address must be 20 bytes, got {len(addr20)}")
    lower = addr20.hex()
    digest = keccak256(lower.encode("ascii")).hex()
    return "0x" + "".join(
        ch.upper() if int(digest[i], 16) >= 8 else ch for i, ch in enumerate(lower)
    )


def eip55_verify(address: str) -> bool:
    if len(address) != 42 or not address.startswith("0x"):
        return False
    body = address[2:]
    try:
        raw = bytes.fromhex(body)
    except ValueError:
        return False
    return eip55_checksum(raw) == address
