"""Application configuration"""

from typing import Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings

load_dotenv()


class Settings(BaseSettings):
    """Application settings"""

    app_name: str = "Width-2 Balance Constants"
    app_version: str = "1.0.0"

    # Brute-force limits
    oracle_limit: int = 10
    canonical_limit: int = 12

    # T_n appendix verification
    appendix_bound: int = 200

    # Exhaustive search
    search_max_size: int = 9
    search_jobs: int = 1
    search_cache_path: Optional[str] = None

    # Output
    decimal_digits: int = 6
    log_level: str = "INFO"

    class Config:
        env_file = ".env"
        env_prefix = "BALANCE_"
        case_sensitive = False


settings = Settings()
