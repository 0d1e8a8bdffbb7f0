"""
Runtime settings read from the environment (optionally seeded from a .env file).
"""
import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


class Settings:
    """Environment-backed settings; read fresh on construction."""

    def __init__(self):
        self.threads = max(1, int(os.getenv("SB_THREADS", "1")))
        self.out_dir = Path(os.getenv("SB_OUT", "results"))
        self.log_level = os.getenv("SB_LOG_LEVEL", "INFO").upper()
        self.path_limit = int(os.getenv("SB_PATH_LIMIT", str(10**7)))


def get_settings() -> Settings:
    return Settings()
