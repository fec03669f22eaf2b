"""
Configuration settings for VoxPath
"""

import os
from typing import Optional


def _cpu_count() -> int:
    return os.cpu_count() or 1


class Settings:
    """Application settings and configuration"""

    # Signal settings
    SAMPLE_RATE: int = int(os.getenv("VOXPATH_SAMPLE_RATE", "16000"))
    FRAME_MS: float = float(os.getenv("VOXPATH_FRAME_MS", "25"))
    HOP_MS: float = float(os.getenv("VOXPATH_HOP_MS", "10"))
    WINDOW: str = os.getenv("VOXPATH_WINDOW", "hamming")

    # Feature settings
    MEL_FILTERS: int = int(os.getenv("VOXPATH_MEL_FILTERS", "20"))
    F_MAX: float = float(os.getenv("VOXPATH_F_MAX", "350"))
    BISPEC_MAX_LEN: int = int(os.getenv("VOXPATH_BISPEC_MAX_LEN", "512"))
    EMBED_DIM: int = int(os.getenv("VOXPATH_EMBED_DIM", "2"))
    EMBED_DELAY: int = int(os.getenv("VOXPATH_EMBED_DELAY", "1"))
    ENTROPY_RADIUS: float = float(os.getenv("VOXPATH_ENTROPY_RADIUS", "0.2"))
    EMD_MAX_IMFS: int = int(os.getenv("VOXPATH_EMD_MAX_IMFS", "12"))
    EMD_MAX_SIFTS: int = int(os.getenv("VOXPATH_EMD_MAX_SIFTS", "10"))
    EMD_SD_THRESHOLD: float = float(os.getenv("VOXPATH_EMD_SD_THRESHOLD", "0.2"))
    LPC_ORDER: int = int(os.getenv("VOXPATH_LPC_ORDER", "13"))

    # Selection and experiment settings
    ALPHA: float = float(os.getenv("VOXPATH_ALPHA", "0.05"))
    MISSING_THRESHOLD: float = float(os.getenv("VOXPATH_MISSING_THRESHOLD", "0.10"))
    REPETITIONS: int = int(os.getenv("VOXPATH_REPETITIONS", "100"))
    TEST_SIZE: float = float(os.getenv("VOXPATH_TEST_SIZE", "0.25"))
    SEED: int = int(os.getenv("VOXPATH_SEED", "0"))
    CLASSIFIER: str = os.getenv("VOXPATH_CLASSIFIER", "forest")
    KNN_K: int = int(os.getenv("VOXPATH_KNN_K", "5"))
    FOREST_TREES: int = int(os.getenv("VOXPATH_FOREST_TREES", "100"))
    FOREST_MAX_DEPTH: int = int(os.getenv("VOXPATH_FOREST_MAX_DEPTH", "16"))

    # Worker parallelism
    THREADS: int = int(os.getenv("VOXPATH_THREADS", str(_cpu_count())))

    # Logging settings
    LOG_LEVEL: str = os.getenv("VOXPATH_LOG_LEVEL", "INFO")
    LOG_FILE: Optional[str] = os.getenv("VOXPATH_LOG_FILE", "logs/voxpath.log")


# Global settings instance
settings = Settings()
