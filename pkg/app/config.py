"""
MeanLab Configuration
Numerical defaults for quadrature, direction search and sweeps
"""
from pydantic_settings import BaseSettings
from typing import Optional
from functools import lru_cache


class Settings(BaseSettings):
    # Application
    APP_NAME: str = "MeanLab"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Output
    OUTPUT_DIR: str = "./results"
    CSV_DIGITS: int = 17

    # Quadrature
    JACOBI_NODES: int = 64
    SMOOTH_NODES: int = 128
    SPHERE_ORDER: int = 64  # n=2 angles; n=3 uses SPHERE_ORDER/2 polar x SPHERE_ORDER azimuth
    TRUNCATION_TOL: float = 1e-9
    MAX_RADIUS_CAP: float = 1e3
    INNER_CUTOFF: Optional[float] = None  # auto from the field's smoothness radius
    NEAR_ORIGIN_REFINEMENTS: int = 20
    BREAKPOINT_GRADING: int = 8

    # Cap threshold root search
    CAP_ROOT_DELTA: float = 1e-6
    CAP_ROOT_TOL: float = 1e-10

    # Critical points: |grad u| < rtol * (1 + sup_norm)
    CRITICAL_GRADIENT_RTOL: float = 1e-10

    # Direction search for sup/inf variants
    DIRECTION_GRID: int = 32
    DIRECTION_REFINEMENTS: int = 3
    DIRECTION_XTOL: float = 1e-8

    # Sweeps
    R_GRID_POINTS: int = 8
    NONLOCAL_SLOPE_TOL: float = 0.3
    LOCAL_SLOPE_TOL: float = 0.2
    RESIDUAL_FLOOR: float = 1e-14

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True


@lru_cache()
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
