"""Application configuration."""

import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, computed_field

load_dotenv()


class Settings(BaseModel):
    """Application settings."""

    PROJECT_NAME: str = "postselect-compiler"
    VERSION: str = "1.0.0"
    DESCRIPTION: str = "Compiles space-bounded PTMs into post-selected quantum circuits and checks them against exact oracles"

    ENVIRONMENT: str = os.getenv("ENVIRONMENT", "development")
    DEBUG: bool = os.getenv("DEBUG", "False").lower() == "true"

    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "WARNING")
    LOG_DIR: Optional[str] = os.getenv("LOG_DIR") or None

    # Caps keeping every run desk-scale
    MAX_CONFIGURATIONS: int = int(os.getenv("MAX_CONFIGURATIONS", str(2 ** 20)))
    MAX_WORK_CELLS: int = int(os.getenv("MAX_WORK_CELLS", "64"))
    MAX_QUBITS: int = int(os.getenv("MAX_QUBITS", "24"))
    DEFAULT_STEP_BUDGET: int = int(os.getenv("DEFAULT_STEP_BUDGET", "256"))

    UNITARY_TOLERANCE: float = float(os.getenv("UNITARY_TOLERANCE", "1e-10"))
    UNDERFLOW_THRESHOLD: float = float(os.getenv("UNDERFLOW_THRESHOLD", "1e-300"))
    SEPARABILITY_TOLERANCE: float = float(os.getenv("SEPARABILITY_TOLERANCE", "1e-10"))
    E_SEARCH_BOUND: float = float(os.getenv("E_SEARCH_BOUND", "1e6"))

    FLOAT_DIGITS: int = int(os.getenv("FLOAT_DIGITS", "12"))
    SWEEP_WORKERS: int = int(os.getenv("SWEEP_WORKERS", "1"))
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "0"))

    @computed_field
    @property
    def FLOAT_FORMAT(self) -> str:
        return f".{self.FLOAT_DIGITS}g"

    @property
    def EFFECTIVE_LOG_LEVEL(self) -> str:
        if self.DEBUG:
            return "DEBUG"
        return self.LOG_LEVEL.upper()


settings = Settings()
