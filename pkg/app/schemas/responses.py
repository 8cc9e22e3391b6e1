from pydantic import BaseModel, Field
from typing import Any, Dict, List, Optional


class AddressOut(BaseModel):
    chain: str = Field(..., description="Chain identifier")
    kind: str = Field(..., description="Address kind")
    address: str = Field(..., description="Canonical address string")
    key: str = Field(..., description="64-hex private key")


class DeriveResponse(BaseModel):
    key: str = Field(..., description="Private key the addresses belong to")
    trivial: bool = Field(..., description="Key is 1 or q - 1")
    location: Optional[Dict[str, int]] = Field(None, description="Coset and exponent when the key lies in a scanned coset")
    addresses: List[AddressOut] = Field(default_factory=list, description="Derived addresses")


class CosetResponse(BaseModel):
    index: int = Field(..., description="Coset index i")
    generator: str = Field(..., description="g_i as 64 hex characters")
    representative: str = Field(..., description="c_i, the coset representative")
    order: str = Field(..., description="Claimed multiplicative order of g_i")
    order_value: str = Field(..., description="Order as a decimal string")
    order_verified: bool = Field(..., description="verify_order(g_i, order)")
    disjoint_from_h: bool = Field(..., description="g_i^h != 1")


class SurveyResponse(BaseModel):
    report: Dict[str, Any] = Field(..., description="Catalog and feasibility data")
    text: str = Field(..., description="Human-readable report")


class ConvertResponse(BaseModel):
    legacy: str = Field(..., description="Base58Check P2PKH/P2SH form")
    cashaddr: str = Field(..., description="CashAddr form")

