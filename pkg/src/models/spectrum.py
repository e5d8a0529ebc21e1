"""Spectral data models: per-element samples and ball-wide tables."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


def root_gaps(vector: tuple[float, ...] | np.ndarray) -> tuple[float, ...]:
    """Simple root gaps tau_i = a_i - a_{i+1}."""
    return tuple(float(vector[i] - vector[i + 1]) for i in range(len(vector) - 1))


class SpectrumSample(BaseModel):
    """Cartan and Jordan projections of one group element.

    Validation Rules:
    - both vectors sorted descending
    - both vectors sum to 0 within 1e-8
    """

    model_config = ConfigDict(frozen=True)

    word: tuple[int, ...] = Field(description="Normal form of the element")
    length: int = Field(ge=0, description="Word length |gamma|")
    cartan: tuple[float, ...] = Field(description="a(gamma): sorted log singular values")
    jordan: tuple[float, ...] = Field(description="lambda(gamma): sorted log eigenvalue moduli")

    @field_validator("cartan", "jordan")
    @classmethod
    def validate_weyl_chamber(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        """Vectors live in the closed Weyl chamber of sl(d)."""
        if any(v[i] < v[i + 1] - 1e-9 for i in range(len(v) - 1)):
            raise ValueError("spectral vector is not sorted descending")
        if abs(sum(v)) > 1e-8 * max(1.0, max(abs(x) for x in v)):
            raise ValueError("spectral vector does not sum to zero")
        return v

    @property
    def cartan_gaps(self) -> tuple[float, ...]:
        """tau_i(a(gamma))."""
        return root_gaps(self.cartan)

    @property
    def jordan_gaps(self) -> tuple[float, ...]:
        """tau_i(lambda(gamma))."""
        return root_gaps(self.jordan)


class BallSpectra(BaseModel):
    """Cartan and Jordan projections for every element of a ball.

    Row i belongs to the i-th element in shortlex order; ``lengths`` holds
    word lengths and ``radius`` the enumeration radius N.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    radius: int = Field(ge=0)
    lengths: np.ndarray = Field(description="(N,) word lengths")
    cartan: np.ndarray = Field(description="(N, d) Cartan vectors")
    jordan: np.ndarray = Field(description="(N, d) Jordan vectors")

    @property
    def size(self) -> int:
        """Number of elements."""
        return int(self.lengths.shape[0])

    def cartan_gap(self, k: int) -> np.ndarray:
        """tau_k(a) per element, k counted from 1."""
        return self.cartan[:, k - 1] - self.cartan[:, k]

    def jordan_gap(self, k: int) -> np.ndarray:
        """tau_k(lambda) per element, k counted from 1."""
        return self.jordan[:, k - 1] - self.jordan[:, k]

    def sample(self, index: int, word: tuple[int, ...]) -> SpectrumSample:
        """Row as a SpectrumSample."""
        return SpectrumSample(
            word=word,
            length=int(self.lengths[index]),
            cartan=tuple(float(x) for x in self.cartan[index]),
            jordan=tuple(float(x) for x in self.jordan[index]),
        )


class PairedSpectra(BaseModel):
    """Values tau(a(rho gamma)) and taubar(a(rhobar gamma)) on the same elements.

    Used by every counting estimator; ``periods`` marks Jordan-based data
    (conjugacy classes) rather than Cartan-based data (balls).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    radius: int = Field(ge=0)
    lengths: np.ndarray = Field(description="(N,) word lengths")
    tau: np.ndarray = Field(description="(N,) tau values for rho")
    taubar: np.ndarray = Field(description="(N,) taubar values for rhobar")
    periods: bool = Field(default=False, description="True when values are Jordan periods")

    @property
    def size(self) -> int:
        """Number of elements."""
        return int(self.lengths.shape[0])

    def swapped(self) -> "PairedSpectra":
        """Exchange the roles of tau and taubar."""
        return PairedSpectra(
            radius=self.radius, lengths=self.lengths, tau=self.taubar, taubar=self.tau, periods=self.periods
        )

    def truncated(self, radius: int) -> "PairedSpectra":
        """Restriction to elements of length <= radius."""
        keep = self.lengths <= radius
        return PairedSpectra(
            radius=radius,
            lengths=self.lengths[keep],
            tau=self.tau[keep],
            taubar=self.taubar[keep],
            periods=self.periods,
        )

    def scaled(self, tau_factor: float = 1.0, taubar_factor: float = 1.0) -> "PairedSpectra":
        """Multiply tau and taubar by positive constants."""
        return PairedSpectra(
            radius=self.radius,
            lengths=self.lengths,
            tau=self.tau * tau_factor,
            taubar=self.taubar * taubar_factor,
            periods=self.periods,
        )
