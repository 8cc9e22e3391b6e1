from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from app.core.errors import BadLength, InvalidCombination, ZeroKey
from app.schemas.chains import (
    AddressKind,
    ChainId,
    combinations,
    is_valid_combination,
)
from app.services import codecs
from app.services.curve import AffinePoint, PrecompTable, scalar_mul, serialize_pubkey
from app.services.scalar_group import Scalar, is_trivial_key

# Base58Check version prefixes for P2PKH.
VERSION_BYTES: Dict[ChainId, bytes] = {
    ChainId.BTC: b"\x00",
    ChainId.DOGE: b"\x1e",
    ChainId.LTC: b"\x30",
    ChainId.DASH: b"\x4c",
    ChainId.ZEC: b"\x1c\xb8",
}

SEGWIT_HRP: Dict[ChainId, str] = {
    ChainId.BTC: "bc",
    ChainId.LTC: "ltc",
}

Combo = Tuple[ChainId, AddressKind]


@dataclass(frozen=True, slots=True)
class ChainAddress:
    chain: ChainId
    kind: AddressKind
    text: str
    key_hex: str
    coset: Optional[int] = None
    exponent: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "chain": self.chain.value,
            "kind": self.kind.value,
            "address": self.text,
            "key": self.key_hex,
        }


def hash160(pubkey: bytes) -> bytes:
    if len(pubkey) not in (33, 65):
        raise BadLength(f"public key must be 33 or 65 bytes, got {len(pubkey)}")
    return codecs.ripemd160(codecs.sha256(pubkey))


def eth_address(point: AffinePoint) -> str:
    # Ethereum hashes X||Y without the 0x04 tag and keeps the last 20 bytes.
    raw = point.x.to_bytes(32, "big") + point.y.to_bytes(32, "big")
    return codecs.eip55_checksum(codecs.keccak256(raw)[-20:])


def addresses_for_point(
    k: Scalar,
    point: AffinePoint,
    combos: Sequence[Combo],
    coset: Optional[int] = None,
    exponent: Optional[int] = None,
) -> List[ChainAddress]:
    """Encode an already computed k*P for every (chain, kind) in combos."""
    key_hex = k.hex()
    hashes: Dict[bool, bytes] = {}

    def payload(compressed: bool) -> bytes:
        if compressed not in hashes:
            hashes[compressed] = hash160(serialize_pubkey(point, compressed))
        return hashes[compressed]

    out: List[ChainAddress] = []
    for chain, kind in combos:
        if kind is AddressKind.P2PKH_UNCOMPRESSED or kind is AddressKind.P2PKH_COMPRESSED:
            text = codecs.base58check_encode(
                codecs.VersionedPayload(
                    VERSION_BYTES[chain], payload(kind is AddressKind.P2PKH_COMPRESSED)
                )
            )
        elif kind is AddressKind.SEGWIT_V0:
            text = codecs.bech32_segwit_encode(SEGWIT_HRP[chain], 0, payload(True))
        elif kind is AddressKind.ETH_EOA:
            text = eth_address(point)
        else:
            text = codecs.cashaddr_encode(
                codecs.CASHADDR_PREFIX,
                codecs.CASHADDR_P2PKH,
                payload(kind is AddressKind.CASHADDR_COMPRESSED),
            )
        out.append(ChainAddress(chain, kind, text, key_hex, coset, exponent))
    return out


def derive(k: Scalar, chain: ChainId, kind: AddressKind, table: PrecompTable) -> ChainAddress:
    if not is_valid_combination(chain, kind):
        raise InvalidCombination(f"{kind.value} is not an address kind of {chain.value}")
    if k.value == 0:
        raise ZeroKey("zero is not a private key")
    return addresses_for_point(k, scalar_mul(k, table), [(chain, kind)])[0]


def derive_all(
    k: Scalar,
    chains: Iterable[ChainId],
    table: PrecompTable,
    kinds: Optional[Iterable[AddressKind]] = None,
) -> List[ChainAddress]:
    """Every valid address of k for the requested chains, from one k*P."""
    combos = combinations(list(dict.fromkeys(chains)), kinds)
    if not combos:
        raise InvalidCombination("no (chain, kind) combination requested")
    if k.value == 0:
        raise ZeroKey("zero is not a private key")
    return addresses_for_point(k, scalar_mul(k, table), combos)


def is_trivial(k: Scalar) -> bool:
    return is_trivial_key(k)
