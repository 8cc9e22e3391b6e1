from enum import Enum
from typing import Dict, Iterable, List, Optional, Set


class ChainId(str, Enum):
    BTC = "btc"
    ETH = "eth"
    DOGE = "doge"
    LTC = "ltc"
    DASH = "dash"
    ZEC = "zec"
    BCH = "bch"


class AddressKind(str, Enum):
    P2PKH_UNCOMPRESSED = "P2PKH_UNCOMPRESSED"
    P2PKH_COMPRESSED = "P2PKH_COMPRESSED"
    SEGWIT_V0 = "SEGWIT_V0"
    ETH_EOA = "ETH_EOA"
    CASHADDR_UNCOMPRESSED = "CASHADDR_UNCOMPRESSED"
    CASHADDR_COMPRESSED = "CASHADDR_COMPRESSED"


_P2PKH = (AddressKind.P2PKH_UNCOMPRESSED, AddressKind.P2PKH_COMPRESSED)

# Valid (chain, kind) combinations, in output order.
CHAIN_KINDS: Dict[ChainId, tuple] = {
    ChainId.BTC: _P2PKH + (AddressKind.SEGWIT_V0,),
    ChainId.ETH: (AddressKind.ETH_EOA,),
    ChainId.DOGE: _P2PKH,
    ChainId.LTC: _P2PKH + (AddressKind.SEGWIT_V0,),
    ChainId.DASH: _P2PKH,
    ChainId.ZEC: _P2PKH,
    ChainId.BCH: (AddressKind.CASHADDR_UNCOMPRESSED, AddressKind.CASHADDR_COMPRESSED),
}

KIND_TOKENS: Dict[str, AddressKind] = {
    "p2pkh_u": AddressKind.P2PKH_UNCOMPRESSED,
    "p2pkh_c": AddressKind.P2PKH_COMPRESSED,
    "segwit": AddressKind.SEGWIT_V0,
    "eth": AddressKind.ETH_EOA,
    "cashaddr_u": AddressKind.CASHADDR_UNCOMPRESSED,
    "cashaddr_c": AddressKind.CASHADDR_COMPRESSED,
}

def is_valid_combination(chain: ChainId, kind: AddressKind) -> bool:
    return kind in CHAIN_KINDS[chain]


def parse_chains(text: str) -> List[ChainId]:
    """'btc,eth' or 'all' -> ordered, de-duplicated chain list."""
    if text.strip().lower() == "all":
        return list(ChainId)
    chains: List[ChainId] = []
    for token in text.split(","):
        token = token.strip().lower()
        if not token:
            continue
        try:
            chain = ChainId(token)
        except ValueError:
            raise ValueError(f"unknown chain {token!r}") from None
        if chain not in chains:
            chains.append(chain)
    return chains


def parse_kinds(text: str) -> Set[AddressKind]:
    if text.strip().lower() == "all":
        return set(AddressKind)
    kinds: Set[AddressKind] = set()
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        kind = KIND_TOKENS.get(token.lower())
        if kind is None:
            try:
                kind = AddressKind(token.upper())
            except ValueError:
                raise ValueError(f"unknown address kind {token!r}") from None
        kinds.add(kind)
    return kinds


def combinations(chains: Iterable[ChainId], kinds: Optional[Iterable[AddressKind]] = None) -> List[tuple]:
    wanted = set(AddressKind) if kinds is None else set(kinds)
    return [
        (chain, kind)
        for chain in chains
        for kind in CHAIN_KINDS[chain]
        if kind in wanted
    ]
