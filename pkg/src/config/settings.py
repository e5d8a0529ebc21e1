"""Configuration management using Pydantic for type safety and validation.

Loads configuration from:
1. config/settings.yaml (default values)
2. Environment variables (override YAML, prefixed with ANOSOV_LAB_, nested with __)
"""

from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict


class EnumerationSettings(BaseModel):
    """Ball enumeration limits and cone-type depth."""

    max_elements: int = Field(default=2_000_000, gt=0)
    memory_budget_mb: int = Field(default=4096, gt=0)
    cone_depth: int = Field(default=6, ge=1)
    max_cone_depth: int = Field(default=8, ge=1)
    workers: int = Field(default=1, ge=1)
    ray_max_backtracks: int = 10_000
    closure_limit: int = 200_000  # length-preserving rewrites explored per reduce call

    @field_validator("max_cone_depth")
    @classmethod
    def validate_cone_depth_cap(cls, v: int) -> int:
        """Cap the cone witness depth at a size the ball enumeration can afford."""
        if v > 12:
            raise ValueError("max_cone_depth above 12 is not supported")
        return v


class NumericsSettings(BaseModel):
    """Floating point policy for long products and spectra."""

    gap_tolerance: float = Field(default=1e-6, gt=0)
    gromov_floor: float = -745.0
    extended_precision: bool = False
    extended_precision_bits: int = Field(default=128, ge=64)
    extended_length_threshold: int = 80  # words longer than this use mpmath when enabled
    relation_tolerance: float = 1e-8


class AnosovSettings(BaseModel):
    """Thresholds for domination, hyperconvexity and isospectrality verdicts."""

    mu_min: float = 1e-3
    determinant_floor: float = 1e-6
    isospectral_tolerance: float = 1e-6
    hyperconvex_triples: int = 10_000
    fit_min_radius: int = 2  # spheres below this radius are ignored by domination fits
    degenerate_lambda: float = 1e-9  # Jordan vectors shorter than this count as elliptic


class LimitSetSettings(BaseModel):
    """Limit-curve sampling and diagnostics."""

    convergence_tolerance: float = 1e-4
    coarse_constant: int = 2
    cone_extra_depth: int = 6
    angle_threshold: float = 0.5
    ray_window: int = 64
    transversality_separation: float = 0.05


class ExponentSettings(BaseModel):
    """Critical-exponent estimation."""

    method: Literal["slope-fit", "poincare-root"] = "slope-fit"
    window: tuple[float, float] = (0.3, 0.9)
    min_levels: int = 5
    grid_points: int = 48
    positivity_allowance: int = 64
    fit_tolerance: float = 0.1
    qcurve_angles: int = 16
    bisection_iterations: int = 80
    isospectral_refusal_factor: float = 10.0

    @field_validator("window")
    @classmethod
    def validate_window(cls, v: tuple[float, float]) -> tuple[float, float]:
        """Window fractions must satisfy 0 < t0 < t1 <= 1."""
        lo, hi = v
        if not 0.0 < lo < hi <= 1.0:
            raise ValueError(f"window fractions must satisfy 0 < t0 < t1 <= 1, got {v}")
        return v


class HausdorffSettings(BaseModel):
    """Box counting and conical-point detection."""

    grid_shifts: int = 8
    min_points: int = 1000
    saturation_fraction: float = 0.2
    eps_steps: int = 12
    min_hits: int = 3
    window_start: int = 10
    min_qualifying: int = 50
    ndiff_tolerance: float = 0.2


class CacheSettings(BaseModel):
    """On-disk enumeration cache."""

    enabled: bool = True
    directory: Path = Path("data/cache")
    database: Path = Path("data/cache/index.db")


class OutputSettings(BaseModel):
    """Artifact emission."""

    directory: Path = Path("output")
    float_digits: int = 17
    include_timestamp: bool = False


class LoggingSettings(BaseModel):
    """Logging configuration."""

    level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"
    format: Literal["json", "text"] = "text"
    directory: Path | None = None
    rotation_days: int = 30
    max_size_mb: int = 100


class Settings(BaseSettings):
    """Main application settings loaded from YAML and environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="ANOSOV_LAB_",
        env_nested_delimiter="__",
        case_sensitive=False,
    )

    enumeration: EnumerationSettings = Field(default_factory=EnumerationSettings)
    numerics: NumericsSettings = Field(default_factory=NumericsSettings)
    anosov: AnosovSettings = Field(default_factory=AnosovSettings)
    limitset: LimitSetSettings = Field(default_factory=LimitSetSettings)
    exponents: ExponentSettings = Field(default_factory=ExponentSettings)
    hausdorff: HausdorffSettings = Field(default_factory=HausdorffSettings)
    cache: CacheSettings = Field(default_factory=CacheSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        """Rank environment variables above constructor values, which carry the YAML file."""
        return env_settings, init_settings, dotenv_settings, file_secret_settings

    @classmethod
    def load_from_yaml(cls, config_path: Path = Path("config/settings.yaml")) -> "Settings":
        """Load settings from YAML file, then override with environment variables.

        Args:
            config_path: Path to YAML configuration file

        Returns:
            Loaded and validated Settings instance

        Raises:
            FileNotFoundError: If config file doesn't exist
            ValidationError: If configuration is invalid
        """
        if not config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")

        with open(config_path) as f:
            yaml_config = yaml.safe_load(f) or {}

        return cls(**yaml_config)


# Global settings instance (lazy-loaded)
_settings: Settings | None = None


def get_settings() -> Settings:
    """Get or create global settings instance.

    Falls back to built-in defaults when config/settings.yaml is absent, so the
    library is usable outside the repository root.

    Returns:
        Global Settings instance
    """
    global _settings
    if _settings is None:
        path = Path("config/settings.yaml")
        _settings = Settings.load_from_yaml(path) if path.exists() else Settings()
    return _settings


def set_settings(settings: Settings) -> None:
    """Replace the global settings instance (CLI --config and tests)."""
    global _settings
    _settings = settings
