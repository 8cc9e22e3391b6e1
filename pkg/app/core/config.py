from pathlib import Path
import os

from pydantic_settings import BaseSettings

PROJECT_ROOT = Path(__file__).resolve().parents[2]


class Settings(BaseSettings):
    # Application Configuration
    APP_NAME: str = "Coset Sweep"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False

    # Logging
    LOG_LEVEL: str = "INFO"

    # Block source (node RPC or paged HTTP provider)
    RPC_URL: str = "http://localhost:8332"
    RPC_TOKEN: str | None = None
    RPC_TIMEOUT: int = 30
    RPC_MAX_RETRIES: int = 3
    RPC_PACING: float = 0.0

    # Corpus indices
    CORPUS_DIR: str = "corpus"
    FP_RATE: float = 1e-6
    INDEX_MEMORY_BUDGET: int = 512 * 1024 * 1024

    # Scan pipeline
    CHUNK_SIZE: int = 1 << 16
    BATCH_SIZE: int = 1024
    THREADS: int = os.cpu_count() or 1
    WINDOW_BITS: int = 4
    ENGINE: str = "table"
    GENERATORS_FIXTURE: str = str(PROJECT_ROOT / "fixtures" / "coset_generators.hex")

    class Config:
        env_file = ".env"
        env_prefix = "SWEEP_"
        case_sensitive = True


settings = Settings()
