import os
from typing import List, Optional
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(f"STABLELAB_{name}", str(default)))


class Settings:

    # Cohomology cache
    CACHE_DIR: Optional[str] = os.getenv("STABLELAB_CACHE_DIR") or None

    # Size caps
    SUBGROUP_CAP: int = _env_int("SUBGROUP_CAP", 48)
    H1_CAP: int = _env_int("H1_CAP", 4096)
    H2_MAX_GROUP: int = _env_int("H2_MAX_GROUP", 16)
    H2_MAX_MODULE: int = _env_int("H2_MAX_MODULE", 16)
    ORACLE_CAP: int = _env_int("ORACLE_CAP", 1_000_000)
    POWERSET_CAP: int = _env_int("POWERSET_CAP", 4096)

    # Sieve
    SIEVE_SEGMENT: int = _env_int("SIEVE_SEGMENT", 1 << 18)

    # Sweeps
    JOBS: int = _env_int("JOBS", 1)
    SWEEP_MAX_ORDER: int = _env_int("SWEEP_MAX_ORDER", 16)
    MAX_CLASS_SETS: int = _env_int("MAX_CLASS_SETS", 32)

    # Output Settings
    LOG_LEVEL: str = os.getenv("STABLELAB_LOG_LEVEL", "WARNING").upper()
    SHOW_PROGRESS: bool = os.getenv("STABLELAB_SHOW_PROGRESS", "true").lower() == "true"

    # Data Paths
    DATA_REPORTS_PATH: str = os.getenv("STABLELAB_REPORTS_PATH", "data/reports")

    @classmethod
    def validate(cls) -> List[str]:
        """Return a list of configuration problems (empty when valid)."""
        problems = []
        caps = {
            "SUBGROUP_CAP": cls.SUBGROUP_CAP,
            "H1_CAP": cls.H1_CAP,
            "H2_MAX_GROUP": cls.H2_MAX_GROUP,
            "H2_MAX_MODULE": cls.H2_MAX_MODULE,
            "ORACLE_CAP": cls.ORACLE_CAP,
            "POWERSET_CAP": cls.POWERSET_CAP,
            "SIEVE_SEGMENT": cls.SIEVE_SEGMENT,
            "JOBS": cls.JOBS,
            "SWEEP_MAX_ORDER": cls.SWEEP_MAX_ORDER,
            "MAX_CLASS_SETS": cls.MAX_CLASS_SETS,
        }
        for name, value in caps.items():
            if value <= 0:
                problems.append(f"STABLELAB_{name} must be positive (got {value})")
        if cls.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            problems.append(f"STABLELAB_LOG_LEVEL is not a logging level: {cls.LOG_LEVEL}")
        return problems


# Global settings instance
settings = Settings()
