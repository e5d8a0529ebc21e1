"""Limit-set sample models."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.models.group import Ray


class BoundarySample(BaseModel):
    """One boundary point x seen through both limit maps.

    xi and xibar are Cartan attractors of the deepest prefix under rho and
    rhobar; the hyperplanes are the normal covectors of xi^{d-1}(x).
    """

    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=0, description="Position in generation order")
    ray: Ray
    xi: tuple[float, ...] = Field(description="Unit vector spanning xi(x)")
    xibar: tuple[float, ...] = Field(description="Unit vector spanning xibar(x)")
    xi_hyperplane: tuple[float, ...] = Field(description="Normal covector of xi^{d-1}(x)")
    xibar_hyperplane: tuple[float, ...] = Field(description="Normal covector of xibar^{d-1}(x)")
    xi_frame: tuple[tuple[float, ...], ...] = Field(description="Left-singular columns U of rho(alpha_N)")
    xibar_frame: tuple[tuple[float, ...], ...] = Field(description="Left-singular columns of rhobar(alpha_N)")
    convergence: float = Field(ge=0.0, description="d(U1(alpha_{N-1}), U1(alpha_N)) for rho")
    convergence_bar: float = Field(ge=0.0, description="Same for rhobar")
    order_key: float = Field(description="Cyclic-order key")
    converged: bool
    tau_profile: tuple[float, ...] = Field(default=(), description="tau_1(a(rho alpha_n)), n = 1..N")
    taubar_profile: tuple[float, ...] = Field(default=(), description="tau_1(a(rhobar alpha_n)), n = 1..N")

    @property
    def xi_vector(self) -> np.ndarray:
        """xi as an array."""
        return np.asarray(self.xi)

    @property
    def xibar_vector(self) -> np.ndarray:
        """xibar as an array."""
        return np.asarray(self.xibar)

    def subspace(self, dimension: int) -> np.ndarray:
        """Orthonormal basis (columns) of xi^dimension(x)."""
        frame = np.asarray(self.xi_frame)
        return frame[:, :dimension]

    def swapped(self) -> "BoundarySample":
        """The same boundary point with rho and rhobar exchanged."""
        return self.model_copy(
            update={
                "xi": self.xibar,
                "xibar": self.xi,
                "xi_hyperplane": self.xibar_hyperplane,
                "xibar_hyperplane": self.xi_hyperplane,
                "xi_frame": self.xibar_frame,
                "xibar_frame": self.xi_frame,
                "convergence": self.convergence_bar,
                "convergence_bar": self.convergence,
                "tau_profile": self.taubar_profile,
                "taubar_profile": self.tau_profile,
            }
        )


class ConeImageStat(BaseModel):
    """Diameter of the image of a prefix's cone at infinity."""

    model_config = ConfigDict(frozen=True)

    prefix: str
    depth: int = Field(ge=0)
    tau1: float = Field(description="tau_1(a(rho alpha_n))")
    members: int = Field(ge=0)
    diameter: float | None = Field(default=None, ge=0.0)
    ratio: float | None = Field(default=None, description="diameter * exp(tau_1)")
    skipped: str | None = Field(default=None, description="Reason the cone was skipped")


class ConcavityProfile(BaseModel):
    """Incremental quotients d(xibar x, xibar y) / d(xi x, xi y)^beta at dyadic scales."""

    model_config = ConfigDict(frozen=True)

    beta: float
    scales: list[int] = Field(description="Neighbour offsets in sample order")
    lower: list[float] = Field(description="Minimum quotient per scale")
    upper: list[float] = Field(description="Maximum quotient per scale")
    median: list[float] = Field(description="Median quotient per scale")

    @property
    def bounded(self) -> bool:
        """True when every scale stays in (0, inf)."""
        return all(lo > 0 and np.isfinite(hi) for lo, hi in zip(self.lower, self.upper))


class TransversalityProfile(BaseModel):
    """Minimal Gromov product Gr(xi^{d-1}(x), xi(y)) over separated pairs."""

    model_config = ConfigDict(frozen=True)

    separation: float
    pairs: int = Field(ge=0)
    min_gromov: float
    witness: tuple[int, int] | None = None
    floor: float

    @property
    def transverse(self) -> bool:
        """True when no pair hit the clamping floor."""
        return self.min_gromov > self.floor


class XiEstimate(BaseModel):
    """Cartan attractor of a ray prefix with its convergence estimate."""

    model_config = ConfigDict(frozen=True)

    point: tuple[float, ...]
    depth: int = Field(ge=1)
    convergence: float = Field(ge=0.0, description="d(U1(alpha_{n-1}), U1(alpha_n))")
    decay_rate: float | None = Field(default=None, description="Slope of log convergence against depth")


class NondiffScan(BaseModel):
    """Two-scale secant test on the graph of the flag curve."""

    model_config = ConfigDict(frozen=True)

    threshold: float
    scores: list[float | None] = Field(description="max |log(near slope / far slope)| per point, None if unscored")
    flagged: list[int] = Field(description="Positions (in sorted order) exceeding the threshold")
    insufficient: list[int] = Field(default_factory=list, description="Positions without 4 neighbours on any side")

    @property
    def fraction(self) -> float:
        """Flagged fraction among scored points."""
        scored = sum(1 for s in self.scores if s is not None)
        return len(self.flagged) / scored if scored else 0.0
