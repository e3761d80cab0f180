from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import List
import logging

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    # Finite differences
    fd_step: float = 1e-5
    richardson: bool = True
    second_step: float = 1e-3
    codazzi_step: float = 1e-3

    # dη(X,Y) = factor * (Xη(Y) - Yη(X) - η([X,Y]))
    exterior_derivative_factor: float = 0.5

    # Tolerances
    structure_tolerance: float = 1e-5
    axiom_tolerance: float = 1e-9
    oracle_tolerance: float = 1e-5
    synthetic_tolerance: float = 1e-10
    oracle_flat_tolerance: float = 1e-6
    degeneracy_threshold: float = 1e-7
    expected_tolerance: float = 1e-4
    composition_tolerance: float = 1e-12

    # Grid sweeps
    default_grid: int = 5
    workers: int = 4
    deformation_factors: List[float] = [0.5, 2.0, 3.0]

    # Reporting
    report_schema_version: str = "1"
    log_level: str = "INFO"

    # API Configuration
    api_host: str = "0.0.0.0"
    api_port: int = 8000
    debug: bool = False

    model_config = SettingsConfigDict(
        env_prefix="KMN_", env_file=".env", case_sensitive=False
    )


def effective_tolerance(tolerance: float, fd_step: float) -> float:
    """Widen a tolerance when the FD step is small enough for round-off to dominate."""
    if fd_step < 1e-6:
        return tolerance * (1e-6 / fd_step)
    return tolerance


def configure_logging(level: str = "") -> None:
    """Configure the root logger once for the CLI and the API server."""
    logging.basicConfig(
        level=(level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger.debug("Logging configured")


# Global settings instance
settings = Settings()
