from pathlib import Path
from typing import Optional, Set, Union
import json
import logging
import os

from pydantic import BaseModel, Field

from app.core.errors import CheckpointMismatch

logger = logging.getLogger(__name__)


class Checkpoint(BaseModel):
    fingerprint: str = Field(..., description="SHA-256 of the scan job parameters")
    chunk_size: int = Field(..., description="Exponents per chunk")
    completed: Set[int] = Field(default_factory=set, description="Completed chunk ids")
    keys_scanned: int = Field(default=0, description="Keys covered by completed chunks")
    hits: int = Field(default=0, description="Hits emitted by completed chunks")

    def save(self, path: Union[str, Path]) -> None:
        """Atomically replace the checkpoint file."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        payload = self.model_dump(mode="json")
        payload["completed"] = sorted(self.completed)
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(payload))
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> Optional["Checkpoint"]:
        path = Path(path)
        if not path.exists():
            return None
        return cls.model_validate_json(path.read_text(encoding="utf-8"))

    @classmethod
    def resume(cls, path: Optional[Union[str, Path]], fingerprint: str, chunk_size: int) -> "Checkpoint":
        """Load the checkpoint for this job, or start a fresh one."""
        existing = cls.load(path) if path else None
        if existing is None:
            return cls(fingerprint=fingerprint, chunk_size=chunk_size)
        if existing.fingerprint != fingerprint or existing.chunk_size != chunk_size:
            raise CheckpointMismatch(f"checkpoint {path} belongs to a different scan job")
        logger.info(f"Resuming from {path}: {len(existing.completed)} chunks already done")
        return existing
