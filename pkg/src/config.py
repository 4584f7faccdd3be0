"""
Configuration management for the unitary Kudla-Rapoport toolkit
"""

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


_LOG_LEVELS = {"TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"}


class Settings(BaseSettings):
    """Process-wide defaults loaded from environment variables"""

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=False,
        extra="ignore"
    )

    # Application Settings
    app_name: str = "Unitary KR Intersection Toolkit"
    app_version: str = "0.1.0"
    log_level: str = "INFO"

    # Parallelism
    default_threads: int = 1

    # Truncation and tolerances
    default_tol: float = 1e-8
    max_radius: float = 1e5  # cap on the Q_h enumeration radius
    arch_max_height: float = 1e4  # cap on |α| at the negative place

    # Green function charts
    divisor_precision_floor: float = 1e-8  # multiplied by sqrt(xi)
    chart_epsilon: float = 0.25  # points must satisfy xi > 1/epsilon
    psi_window: float = 1.0

    # Lattices
    isotropic_search_bound: int = 2

    # Theta residuals are evaluated in mpmath at this many digits
    theta_precision_digits: int = 30

    def validate_numeric_ranges(self) -> bool:
        """Validate that every tolerance, cap and bound is usable."""
        positive = {
            "default_tol": self.default_tol,
            "max_radius": self.max_radius,
            "arch_max_height": self.arch_max_height,
            "divisor_precision_floor": self.divisor_precision_floor,
            "chart_epsilon": self.chart_epsilon,
            "psi_window": self.psi_window,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"{name.upper()} must be positive, got {value}")

        if self.default_threads < 1:
            raise ValueError("DEFAULT_THREADS must be at least 1")
        if self.isotropic_search_bound < 1:
            raise ValueError("ISOTROPIC_SEARCH_BOUND must be at least 1")
        if self.theta_precision_digits < 15:
            raise ValueError("THETA_PRECISION_DIGITS below double precision is pointless")

        if self.log_level.upper() not in _LOG_LEVELS:
            raise ValueError(
                f"Invalid log_level value: {self.log_level}. "
                f"Must be one of {', '.join(sorted(_LOG_LEVELS))}"
            )
        return True


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    settings = Settings()
    settings.validate_numeric_ranges()
    return settings
