from datetime import datetime
from typing import List, Optional
import hashlib
import json

from pydantic import BaseModel, Field, model_validator

from app.core.config import settings
from app.schemas.chains import AddressKind, ChainId, combinations, is_valid_combination
from app.services.scalar_group import COSET_COUNT, H


class ScanJob(BaseModel):
    cosets: List[int] = Field(default_factory=lambda: [0], description="Coset indices to sweep")
    chains: List[ChainId] = Field(default_factory=lambda: [ChainId.BTC], description="Chains to derive")
    kinds: List[AddressKind] = Field(default_factory=lambda: list(AddressKind), description="Address kinds")
    start: int = Field(default=0, ge=0, description="First exponent j (inclusive)")
    end: int = Field(default=H, ge=0, le=H, description="Last exponent j (exclusive)")
    corpus_dir: str = Field(default_factory=lambda: settings.CORPUS_DIR, description="Directory of per-chain indices")
    threads: int = Field(default_factory=lambda: settings.THREADS, ge=1, description="Worker processes")
    checkpoint: Optional[str] = Field(None, description="Checkpoint file path")
    output: str = Field(default="hits.jsonl", description="Hit lines are appended here")
    chunk_size: int = Field(default_factory=lambda: settings.CHUNK_SIZE, ge=1, description="Exponents per chunk")
    batch_size: int = Field(default_factory=lambda: settings.BATCH_SIZE, ge=1, description="Keys per normalization batch")
    window_bits: int = Field(default_factory=lambda: settings.WINDOW_BITS, ge=1, le=8)
    engine: str = Field(default_factory=lambda: settings.ENGINE)

    @model_validator(mode="after")
    def _check_extent(self) -> "ScanJob":
        if not self.cosets:
            raise ValueError("at least one coset is required")
        if any(not 0 <= i < COSET_COUNT for i in self.cosets):
            raise ValueError(f"coset indices must be in [0, {COSET_COUNT - 1}]")
        if self.start > self.end:
            raise ValueError("start must not exceed end")
        if not self.chains:
            raise ValueError("at least one chain is required")
        explicit = set(self.kinds) != set(AddressKind)
        for kind in self.kinds if explicit else ():
            if not any(is_valid_combination(chain, kind) for chain in self.chains):
                raise ValueError(f"{kind.value} is not valid for any requested chain")
        if not self.combos():
            raise ValueError("no (chain, kind) combination requested")
        self.cosets = sorted(set(self.cosets))
        return self

    def combos(self) -> list:
        return combinations(self.chains, self.kinds)

    @property
    def count(self) -> int:
        return self.end - self.start

    def fingerprint(self) -> str:
        canonical = {
            "cosets": sorted(self.cosets),
            "chains": sorted(c.value for c in self.chains),
            "kinds": sorted(k.value for k in self.kinds),
            "start": self.start,
            "end": self.end,
            "chunk_size": self.chunk_size,
        }
        return hashlib.sha256(json.dumps(canonical, sort_keys=True).encode()).hexdigest()


class HitRecord(BaseModel):
    chain: ChainId = Field(..., description="Chain the address was found on")
    kind: AddressKind = Field(..., description="Address kind that matched")
    address: str = Field(..., description="Address in canonical form")
    key: str = Field(..., description="64-hex private key")
    coset: int = Field(..., description="Coset index i")
    exponent: int = Field(..., description="Exponent j, key = c_i * g_0^j")
    trivial: bool = Field(..., description="Key is 1 or q - 1")
    timestamp: datetime = Field(default_factory=datetime.utcnow, description="Discovery time")

    def identity(self) -> tuple:
        return (self.chain, self.kind, self.address, self.coset, self.exponent)


class ScanSummary(BaseModel):
    keys: int = Field(..., description="Keys covered by completed chunks, across resumes")
    keys_this_run: int = Field(..., description="Keys scanned by this invocation")
    addresses: int = Field(..., description="Addresses derived and checked")
    hits: int = Field(..., description="Hit records emitted, across resumes")
    chunks: int = Field(..., description="Chunks in the job plan")
    throughput: float = Field(..., description="Keys per second in this invocation")
    duration: float = Field(..., description="Seconds spent in this invocation")
