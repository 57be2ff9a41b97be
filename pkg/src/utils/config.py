import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic_settings import BaseSettings

load_dotenv(dotenv_path=".env")

class _Settings(BaseSettings):
    APP_NAME: str = "Memristive DFN Reservoir Simulator"

    DATA_DIR: Path = Path(os.getenv("DATA_DIR", "data/mnist"))
    OUTPUT_DIR: Path = Path(os.getenv("OUTPUT_DIR", "output"))

    WORKERS: int = int(os.getenv("WORKERS", "1"))
    FEATURE_CHUNK_SIZE: int = 2048 # images simulated per vectorised batch

    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

settings = _Settings()
