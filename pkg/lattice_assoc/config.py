"""Configuration management for lattice-assoc."""
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Literal


class Settings(BaseSettings):
    """Library and CLI settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix='LATTICE_ASSOC_',
        env_file='.env',
        env_file_encoding='utf-8',
        case_sensitive=False
    )

    # Environment
    env: Literal['development', 'production'] = 'development'
    debug: bool = False

    # Observability
    log_level: str = 'INFO'
    metrics_enabled: bool = True

    # Inference
    permutations: int = 999
    seed: int = 12345
    alpha: float = 0.05
    n_jobs: int = 1
    chunk_size: int = 128

    # Weights
    contiguity_tolerance: float = 0.0  # 0 = exact coordinate matching
    strict_weights: bool = False

    # Simulation
    dense_solver_max_n: int = 2500
    solver_tolerance: float = 1e-10

    # Numerical guards
    rank_tolerance: float = 1e-10
    conditioning_guard: float = 1e-12


# Global settings instance
settings = Settings()
