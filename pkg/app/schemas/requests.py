from pydantic import BaseModel, Field
from typing import List, Optional

from app.schemas.chains import AddressKind, ChainId


class DeriveRequest(BaseModel):
    key: str = Field(..., description="Private key as 64 hex characters")
    chains: List[ChainId] = Field(default_factory=lambda: list(ChainId), description="Chains to derive")
    kinds: Optional[List[AddressKind]] = Field(None, description="Restrict to these address kinds")


class SurveyRequest(BaseModel):
    curve: str = Field(default="secp256k1", description="secp256k1, curve25519 or p256")
    budget: int = Field(default=10**8, ge=1, description="Largest subgroup order to list")
    rate: float = Field(default=50_000.0, gt=0, description="Keys per second for scan time estimates")


class ConvertRequest(BaseModel):
    address: str = Field(..., description="Legacy Base58 or CashAddr Bitcoin Cash address")
    with_prefix: bool = Field(default=False, description="Emit the bitcoincash: prefix")
