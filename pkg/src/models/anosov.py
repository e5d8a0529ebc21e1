"""Verdict models for domination, hyperconvexity and isospectrality checks."""

from pydantic import BaseModel, ConfigDict, Field, model_validator


class DominationFit(BaseModel):
    """Affine lower bound tau_k(a(gamma)) >= mu|gamma| - C over enumerated spheres.

    Validation Rules:
    - verdict implies mu > 0
    """

    model_config = ConfigDict(frozen=True)

    k: int = Field(ge=1, description="Root index")
    mu: float = Field(description="Slope of the supporting line")
    intercept: float = Field(ge=0.0, description="C >= 0")
    min_margin: float = Field(description="Smallest gap between sphere minima and the line")
    radius: int = Field(ge=0, description="Enumeration radius N")
    window: tuple[int, int] = Field(description="Sphere radii used by the fit")
    sphere_minima: list[float] = Field(default_factory=list, description="min tau_k per sphere in the window")
    verdict: bool

    @model_validator(mode="after")
    def validate_verdict(self) -> "DominationFit":
        """A positive verdict needs a positive slope."""
        if self.verdict and self.mu <= 0:
            raise ValueError("domination verdict requires mu > 0")
        return self


class LimitConeSample(BaseModel):
    """Projectivized Jordan projections and their hull in gap coordinates."""

    model_config = ConfigDict(frozen=True)

    points: list[tuple[float, ...]] = Field(description="Unit-norm Jordan vectors in the Weyl chamber")
    gap_points: list[tuple[float, ...]] = Field(description="(tau_1, tau_2, ...) of each point")
    hull_area: float = Field(ge=0.0, description="Area of the 2-D hull of gap points and the origin")
    aperture: float = Field(ge=0.0, description="Angular width of the cone in the (tau_1, tau_2) plane")
    discarded: int = Field(default=0, description="Elliptic or torsion classes with lambda ~ 0")


class HyperconvexityReport(BaseModel):
    """Minimum normalized volume over sampled triples."""

    model_config = ConfigDict(frozen=True)

    p: int = Field(ge=2)
    triples: int = Field(ge=0, description="Triples evaluated after the distinctness filter")
    filtered: int = Field(ge=0, description="Triples dropped as coincident")
    min_volume: float = Field(ge=0.0)
    witness: tuple[int, int, int] | None = Field(default=None, description="Sample indices of the minimum")
    floor: float
    verdict: bool
    caveat: str = "sampled, not proven"


class IsospectralRow(BaseModel):
    """Per-class comparison of top Jordan gaps."""

    model_config = ConfigDict(frozen=True)

    word: str
    length: int
    tau1_rho: float
    tau1_rhobar: float
    deviation: float


class IsospectralityReport(BaseModel):
    """Maximal deviation of tau_1(lambda) between two representations."""

    model_config = ConfigDict(frozen=True)

    radius: int
    max_deviation: float = Field(ge=0.0)
    witness: str | None = Field(default=None, description="Class realizing the maximum")
    tolerance: float
    isospectral: bool
    rows: list[IsospectralRow] = Field(default_factory=list)
