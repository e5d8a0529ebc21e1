"""Point clouds and dimension-estimate models."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.exponents import ExponentEstimate


class MetricPointCloud(BaseModel):
    """Points in one projective space, or pairs of points in a product of two.

    Each factor is an (n, d_i) array of homogeneous coordinates. The product
    metric is the L-infinity combination of the factor metrics.

    Validation Rules:
    - one factor with metric "projective", or two with metric "product-linf"
    - all factors have the same number of rows
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    factors: tuple[np.ndarray, ...]
    metric: Literal["projective", "product-linf"]
    label: str = ""

    @model_validator(mode="after")
    def validate_factors(self) -> "MetricPointCloud":
        """Factor count must match the metric tag."""
        expected = 1 if self.metric == "projective" else 2
        if len(self.factors) != expected:
            raise ValueError(f"metric '{self.metric}' needs {expected} factor(s), got {len(self.factors)}")
        rows = {f.shape[0] for f in self.factors}
        if len(rows) != 1 or any(f.ndim != 2 for f in self.factors):
            raise ValueError("factors must be 2-D arrays with equal row counts")
        return self

    @property
    def size(self) -> int:
        """Number of points."""
        return int(self.factors[0].shape[0])

    def subset(self, mask: np.ndarray) -> "MetricPointCloud":
        """Cloud restricted to the rows selected by ``mask``."""
        return MetricPointCloud(factors=tuple(f[mask] for f in self.factors), metric=self.metric, label=self.label)

    def factor(self, index: int) -> "MetricPointCloud":
        """Single-factor cloud."""
        return MetricPointCloud(factors=(self.factors[index],), metric="projective", label=f"{self.label}[{index}]")


class BoxDimensionResult(BaseModel):
    """Least-squares box-counting dimension with its raw counts."""

    model_config = ConfigDict(frozen=True)

    dimension: float
    stderr: float = Field(ge=0.0)
    eps: list[float] = Field(description="Scales used by the fit")
    counts: list[list[int]] = Field(description="Occupied boxes per (scale, grid shift)")
    mean_counts: list[float]
    local_slopes: list[float] = Field(description="-d log N / d log eps between consecutive scales")
    trimmed: list[float] = Field(default_factory=list, description="Saturated scales removed from the fit")
    points: int


class RayProfile(BaseModel):
    """tau and taubar along the prefixes alpha_1..alpha_N of one ray."""

    model_config = ConfigDict(frozen=True)

    sample_id: int
    tau: tuple[float, ...]
    taubar: tuple[float, ...]


class ConicalVerdict(BaseModel):
    """Finite-depth beta-conicality of one ray.

    Validation Rules:
    - verdict implies len(hits) >= min_hits
    """

    model_config = ConfigDict(frozen=True)

    sample_id: int
    beta: float
    R: float = Field(gt=0.0)
    window: tuple[int, int]
    hits: list[int] = Field(description="Depths k with |beta*tau - taubar| <= R")
    min_hits: int = Field(ge=1)
    verdict: bool

    @model_validator(mode="after")
    def validate_verdict(self) -> "ConicalVerdict":
        """A conical verdict needs enough hits."""
        if self.verdict and len(self.hits) < self.min_hits:
            raise ValueError("conical verdict requires at least min_hits hits")
        return self


class CoverDimensionEstimate(BaseModel):
    """Abscissa of convergence of the cover sums over beta-conical elements."""

    model_config = ConfigDict(frozen=True)

    value: float
    bracket: tuple[float, float]
    beta: float
    R: float
    radius: int
    qualifying: int = Field(ge=0)
    total: int = Field(ge=0)
    shell_sums: list[float] = Field(description="Per-depth cover sums at the estimate, depths 1..N")


class NDiffReport(BaseModel):
    """Box dimension of 1-conical flag-curve points against h_{inf,1}."""

    model_config = ConfigDict(frozen=True)

    rho: str
    rhobar: str
    samples: int
    flagged: int
    conical_fraction: float
    R: float
    box: BoxDimensionResult
    hinf1: ExponentEstimate
    difference: float
    tolerance: float
    scan_overlap: float = Field(description="Share of conical samples also flagged by the secant scan")
    isospectral_deviation: float
    verdict: bool
