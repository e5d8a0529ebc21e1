"""Critical-exponent, Q-curve and inequality-chain models."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

ExponentMethod = Literal["slope-fit", "poincare-root"]


class Functional2D(BaseModel):
    """phi = s * tau + u * taubar on paired spectra.

    Validation Rules:
    - (s, u) != (0, 0)
    """

    model_config = ConfigDict(frozen=True)

    s: float = Field(description="Coefficient of tau")
    u: float = Field(description="Coefficient of taubar")

    @model_validator(mode="after")
    def validate_nonzero(self) -> "Functional2D":
        """The zero functional has no critical exponent."""
        if self.s == 0.0 and self.u == 0.0:
            raise ValueError("functional must be nonzero")
        return self

    def evaluate(self, tau: np.ndarray, taubar: np.ndarray) -> np.ndarray:
        """phi on each element."""
        return self.s * tau + self.u * taubar

    def scaled(self, factor: float) -> "Functional2D":
        """factor * phi."""
        return Functional2D(s=self.s * factor, u=self.u * factor)

    @property
    def label(self) -> str:
        """Human-readable form."""
        return f"{self.s:g}*tau + {self.u:g}*taubar"


class CombinedFunctional(BaseModel):
    """Pointwise max or min of two functionals, e.g. max{beta*tau, taubar}."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["max", "min"]
    first: Functional2D
    second: Functional2D

    def evaluate(self, tau: np.ndarray, taubar: np.ndarray) -> np.ndarray:
        """Combined value on each element."""
        a = self.first.evaluate(tau, taubar)
        b = self.second.evaluate(tau, taubar)
        return np.maximum(a, b) if self.kind == "max" else np.minimum(a, b)

    def scaled(self, factor: float) -> "CombinedFunctional":
        """factor * phi (factor > 0)."""
        if factor <= 0:
            raise ValueError("combined functionals scale by positive factors only")
        return CombinedFunctional(
            kind=self.kind, first=self.first.scaled(factor), second=self.second.scaled(factor)
        )

    @property
    def label(self) -> str:
        """Human-readable form."""
        return f"{self.kind}{{{self.first.label}, {self.second.label}}}"


Functional = Functional2D | CombinedFunctional


class ExponentEstimate(BaseModel):
    """Critical exponent h_phi estimated at finite depth.

    Validation Rules:
    - value > 0
    - a poincare-root bracket contains the value
    """

    model_config = ConfigDict(frozen=True)

    value: float = Field(gt=0.0, description="Estimated critical exponent")
    method: ExponentMethod
    functional: str = Field(description="Label of the functional")
    radius: int = Field(ge=0, description="Enumeration radius N")
    window: tuple[float, float] | None = Field(default=None, description="Counting window [t0, t1] (slope-fit)")
    residual: float = Field(default=0.0, ge=0.0, description="Regression standard error or bracket width")
    bracket: tuple[float, float] | None = Field(default=None, description="Final bisection bracket (poincare-root)")
    levels: int = Field(default=0, ge=0, description="Sphere levels inside the window")
    nonpositive: int = Field(default=0, ge=0, description="Elements with phi <= 0 that were discarded")

    @model_validator(mode="after")
    def validate_bracket(self) -> "ExponentEstimate":
        """Bisection results must lie in their bracket."""
        if self.bracket is not None and not self.bracket[0] <= self.value <= self.bracket[1]:
            raise ValueError(f"value {self.value} outside bracket {self.bracket}")
        return self


class CrossValidation(BaseModel):
    """Both estimators on one functional; slope-fit is the headline value."""

    model_config = ConfigDict(frozen=True)

    slope_fit: ExponentEstimate
    poincare_root: ExponentEstimate

    @property
    def value(self) -> float:
        """Headline estimate."""
        return self.slope_fit.value

    @property
    def discrepancy(self) -> float:
        """|slope-fit - poincare-root|, reported as systematic error."""
        return abs(self.slope_fit.value - self.poincare_root.value)

    @property
    def relative_discrepancy(self) -> float:
        """Discrepancy relative to the headline value."""
        return self.discrepancy / self.value

    @property
    def uncertainty(self) -> float:
        """Statistical plus systematic error."""
        return self.slope_fit.residual + self.discrepancy


class QCurvePoint(BaseModel):
    """A point h_theta * (cos theta, sin theta) of the critical curve Q."""

    model_config = ConfigDict(frozen=True)

    theta: float
    s: float = Field(description="Coefficient of tau after scaling to h = 1")
    u: float = Field(description="Coefficient of taubar after scaling to h = 1")
    h_raw: float = Field(gt=0.0, description="Exponent of the unscaled direction")
    residual: float = Field(default=0.0, ge=0.0)
    tangent: tuple[float, float] = Field(default=(0.0, 0.0), description="d(s, u)/d theta")
    dual_direction: tuple[float, float] = Field(default=(0.0, 0.0), description="Unit outward normal u_phi")


class SkippedDirection(BaseModel):
    """A Q-curve direction that could not be estimated."""

    model_config = ConfigDict(frozen=True)

    theta: float
    reason: str


class QCurve(BaseModel):
    """Sampled critical curve ordered by angle."""

    model_config = ConfigDict(frozen=True)

    points: list[QCurvePoint]
    skipped: list[SkippedDirection] = Field(default_factory=list)
    radius: int = Field(ge=0)

    def coordinates(self) -> np.ndarray:
        """(n, 2) array of (s, u)."""
        return np.array([[p.s, p.u] for p in self.points])


class PhiInfinityResult(BaseModel):
    """Minimizer of |s|/beta + |u| on Q."""

    model_config = ConfigDict(frozen=True)

    beta: float = Field(gt=0.0, le=1.0)
    theta: float
    s: float
    u: float
    norm: float = Field(description="|s|/beta + |u| at the minimizer")
    tangent: tuple[float, float] = Field(description="Unit tangent of Q at the minimizer")
    expected_tangent: tuple[float, float] = Field(description="Unit vector along beta*tau - taubar")
    tangent_misalignment: float = Field(ge=0.0, description="Sine of the angle between the two tangents")
    inconclusive: bool = Field(description="Minimizer at an end of the sampled arc")


class IntersectionEstimate(BaseModel):
    """Average period ratio taubar/tau over classes with tau-period <= t."""

    model_config = ConfigDict(frozen=True)

    value: float
    count: int = Field(gt=0)
    t: float


class ChainInequality(BaseModel):
    """One inequality (or equality) of the entropy chain with its margin."""

    model_config = ConfigDict(frozen=True)

    name: str
    relation: Literal["<=", "="]
    lhs: float
    rhs: float
    margin: float = Field(description="rhs - lhs")
    tolerance: float = Field(ge=0.0, description="Combined uncertainty of both sides")
    passed: bool


class TheoremBReport(BaseModel):
    """Entropy quantities and chain checks for a non-isospectral pair."""

    model_config = ConfigDict(frozen=True)

    rho: str
    rhobar: str
    beta: float = Field(gt=0.0, le=1.0)
    radius: int
    quantities: dict[str, float]
    uncertainties: dict[str, float]
    inequalities: list[ChainInequality]
    isospectral_deviation: float = Field(description="Max top-gap deviation over conjugacy classes")
    beta_bracket: tuple[float, float] | None = Field(default=None, description="(1/I_taubar(tau), I_tau(taubar))")
    caveat: str = "finite-depth estimates; strict inequalities are certified as <= with margin"

    @property
    def passed(self) -> bool:
        """All chain checks pass within tolerance."""
        return all(item.passed for item in self.inequalities)
