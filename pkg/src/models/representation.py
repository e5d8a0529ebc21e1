"""Linear representation models.

A Representation stores one real d×d matrix per generator of its presentation,
formal inverses included, so evaluating a word never inverts a matrix.
"""

import hashlib
from functools import cached_property
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.group import Presentation, Word


class Representation(BaseModel):
    """Homomorphism from a presented group to GL(d, R), |det| = 1.

    Validation Rules:
    - one square matrix per generator, all finite and of the same size
    - the matrix of s^-1 inverts the matrix of s within 1e-10
    - |det| = 1 within 1e-10
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str = Field(description="Catalog name or file stem")
    presentation: Presentation = Field(description="Presentation the matrices realize")
    matrices: tuple[np.ndarray, ...] = Field(description="Generator matrices indexed like presentation.generators")
    field: Literal["R"] = Field(default="R", description="Ground field tag")

    @model_validator(mode="after")
    def validate_matrices(self) -> "Representation":
        """Check shapes, inverse consistency and unimodularity."""
        if len(self.matrices) != self.presentation.rank:
            raise ValueError(
                f"expected {self.presentation.rank} generator matrices, got {len(self.matrices)}"
            )
        d = self.matrices[0].shape[0]
        for index, m in enumerate(self.matrices):
            name = self.presentation.generators[index]
            if m.shape != (d, d):
                raise ValueError(f"matrix of {name} is not {d}x{d}")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"matrix of {name} has non-finite entries")
            if abs(abs(np.linalg.det(m)) - 1.0) > 1e-10:
                raise ValueError(f"matrix of {name} has |det| != 1")
            inverse = self.matrices[self.presentation.inverses[index]]
            if np.max(np.abs(m @ inverse - np.eye(d))) > 1e-10:
                raise ValueError(f"matrix of {name} is not inverted by its formal inverse")
        return self

    @property
    def dimension(self) -> int:
        """Dimension d of the representation space."""
        return int(self.matrices[0].shape[0])

    @cached_property
    def stack(self) -> np.ndarray:
        """Generator matrices as one (n, d, d) array."""
        return np.stack(self.matrices)

    @cached_property
    def log_abs_det(self) -> np.ndarray:
        """log|det| per generator (zero up to rounding)."""
        return np.array([np.linalg.slogdet(m)[1] for m in self.matrices])

    def product(self, word: Word) -> np.ndarray:
        """Plain unnormalized product, for short words and oracles."""
        result = np.eye(self.dimension)
        for s in word:
            result = result @ self.matrices[s]
        return result

    def content_hash(self) -> str:
        """sha256 over the presentation hash and the matrices at full precision."""
        digest = hashlib.sha256(self.presentation.content_hash().encode())
        for m in self.matrices:
            digest.update(np.ascontiguousarray(m, dtype=np.float64).tobytes())
        return digest.hexdigest()


class NormalizedMatrix(BaseModel):
    """Unit-Frobenius matrix with the divided-out scale kept in log form.

    The true product equals exp(log_scale) * matrix; log_det accumulates
    log|det| of the true product so tiny singular values can be recovered.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray = Field(description="Stored matrix with Frobenius norm 1")
    log_scale: float = Field(description="Accumulated log of divided-out norms")
    log_det: float = Field(default=0.0, description="log|det| of the true product")

    @property
    def dimension(self) -> int:
        """Matrix size."""
        return int(self.matrix.shape[0])

    def true_matrix(self) -> np.ndarray:
        """Materialize the unnormalized product (may overflow for long words)."""
        return np.exp(self.log_scale) * self.matrix

    def compose(self, other: "NormalizedMatrix") -> "NormalizedMatrix":
        """Normalized product self·other with scales adding."""
        product = self.matrix @ other.matrix
        norm = float(np.linalg.norm(product))
        return NormalizedMatrix(
            matrix=product / norm,
            log_scale=self.log_scale + other.log_scale + float(np.log(norm)),
            log_det=self.log_det + other.log_det,
        )


class BallProducts(BaseModel):
    """Normalized products for every element of an enumerated ball.

    Row i holds the product along the normal form of element i; ``dual_*``
    arrays hold the inverse-transpose products when they were requested.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    radius: int = Field(ge=0)
    lengths: np.ndarray = Field(description="(M,) word lengths")
    matrices: np.ndarray = Field(description="(M, d, d) unit-Frobenius matrices")
    log_scale: np.ndarray = Field(description="(M,) accumulated log scales")
    log_det: np.ndarray = Field(description="(M,) accumulated log|det|")
    dual_matrices: np.ndarray | None = Field(default=None, description="(M, d, d) dual products")
    dual_log_scale: np.ndarray | None = Field(default=None, description="(M,) dual log scales")

    @property
    def size(self) -> int:
        """Number of elements."""
        return int(self.lengths.shape[0])

    def element(self, index: int) -> NormalizedMatrix:
        """Row as a NormalizedMatrix."""
        return NormalizedMatrix(
            matrix=self.matrices[index],
            log_scale=float(self.log_scale[index]),
            log_det=float(self.log_det[index]),
        )

    def dual_element(self, index: int) -> NormalizedMatrix | None:
        """Dual row as a NormalizedMatrix, if tracked."""
        if self.dual_matrices is None or self.dual_log_scale is None:
            return None
        return NormalizedMatrix(
            matrix=self.dual_matrices[index],
            log_scale=float(self.dual_log_scale[index]),
            log_det=-float(self.log_det[index]),
        )
