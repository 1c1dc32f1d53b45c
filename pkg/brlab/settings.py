"""Environment-driven settings (BRLAB_* variables, optional .env file)"""
import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv(override=False)


class BrlabSettings(BaseSettings):
    """Process-wide settings.

    ``threads = 0`` means one worker per CPU.
    """

    model_config = SettingsConfigDict(env_prefix="BRLAB_", extra="ignore")

    threads: int = 0
    log_level: str = "WARNING"
    progress: bool = False

    @field_validator("threads")
    @classmethod
    def _non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("threads must be >= 0")
        return v

    @field_validator("log_level")
    @classmethod
    def _upper(cls, v: str) -> str:
        return v.upper()

    def resolved_threads(self) -> int:
        return self.threads or (os.cpu_count() or 1)


@lru_cache(maxsize=1)
def get_settings() -> BrlabSettings:
    return BrlabSettings()
