from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field
from typing import Optional


class Settings(BaseSettings):
    """
    Runtime settings, read from the environment (or a local .env file).
    """
    # Random coordinate frames (hyperflex locus, discriminant)
    SEED: Optional[int] = Field(None, alias="QUARTIX_SEED")
    FRAME_BOUND: int = Field(5, alias="QUARTIX_FRAME_BOUND")
    MAX_FRAME_ATTEMPTS: int = Field(20, alias="QUARTIX_MAX_FRAME_ATTEMPTS")

    # Field construction
    CHECK_IRREDUCIBLE: bool = Field(True, alias="QUARTIX_CHECK_IRREDUCIBLE")

    # Result store for batch runs
    DATABASE_URL: str = Field("data/quartix.duckdb", alias="QUARTIX_DATABASE_URL")

    LOG_LEVEL: str = Field("INFO", alias="QUARTIX_LOG_LEVEL")
    WORKERS: int = Field(1, alias="QUARTIX_WORKERS")

    # Allow extra fields in .env without error
    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra='ignore',
                                      populate_by_name=True)


# Singleton instance for use across the app
settings = Settings()
