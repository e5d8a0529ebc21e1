"""Group-theoretic domain models.

Words are tuples of generator indices; a Presentation owns the generator names,
the formal inverse table and the relators.
"""

import hashlib
import json
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Word = tuple[int, ...]


class PresentationKind(str, Enum):
    """Families of presentations the lab knows how to solve."""

    FREE = "free"
    SURFACE = "surface"
    TRIANGLE = "triangle"


class Presentation(BaseModel):
    """Finite presentation with a symmetric generating set.

    Validation Rules:
    - inverses is an involution on generator indices
    - every relator is freely and cyclically reduced
    - surface presentations carry exactly one relator of length 4g
    """

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "name": "free-2",
                "kind": "free",
                "generators": ["a", "A", "b", "B"],
                "inverses": [1, 0, 3, 2],
                "relators": [],
                "parameters": {"rank": 2},
            }
        },
    )

    name: str = Field(description="Human-readable name, e.g. 'surface-g2'")
    kind: PresentationKind = Field(description="Presentation family")
    generators: tuple[str, ...] = Field(description="Generator names in shortlex order", min_length=1)
    inverses: tuple[int, ...] = Field(description="Index of the formal inverse of each generator")
    relators: tuple[tuple[int, ...], ...] = Field(default=(), description="Relator words")
    parameters: dict[str, Any] = Field(default_factory=dict, description="rank / genus / orders")

    @model_validator(mode="after")
    def validate_structure(self) -> "Presentation":
        """Check the inverse table and relator shape."""
        n = len(self.generators)
        if len(self.inverses) != n:
            raise ValueError("inverses must have one entry per generator")
        for i, j in enumerate(self.inverses):
            if not 0 <= j < n or self.inverses[j] != i:
                raise ValueError(f"inverse table is not an involution at generator {self.generators[i]}")
        for relator in self.relators:
            if not relator:
                raise ValueError("empty relator")
            if any(not 0 <= s < n for s in relator):
                raise ValueError("relator uses an unknown generator")
            if not self.is_cyclically_reduced(relator):
                raise ValueError(f"relator {self.format_word(relator)} is not cyclically reduced")
        if self.kind == PresentationKind.SURFACE:
            genus = int(self.parameters.get("genus", 0))
            if len(self.relators) != 1 or len(self.relators[0]) != 4 * genus:
                raise ValueError("surface presentation needs one commutator relator of length 4g")
        return self

    @property
    def rank(self) -> int:
        """Number of generators including formal inverses."""
        return len(self.generators)

    @property
    def involutions(self) -> tuple[int, ...]:
        """Generators that are their own inverse."""
        return tuple(i for i, j in enumerate(self.inverses) if i == j)

    def inverse_word(self, word: Word) -> Word:
        """Formal inverse of a word."""
        inv = self.inverses
        return tuple(inv[s] for s in reversed(word))

    def is_freely_reduced(self, word: Word) -> bool:
        """True when no letter is followed by its formal inverse."""
        inv = self.inverses
        return all(inv[word[i]] != word[i + 1] for i in range(len(word) - 1))

    def is_cyclically_reduced(self, word: Word) -> bool:
        """True when the word is freely reduced and its ends do not cancel."""
        if not self.is_freely_reduced(word):
            return False
        return len(word) < 2 or self.inverses[word[0]] != word[-1]

    def relation_words(self) -> list[Word]:
        """All words that must evaluate to the identity, including involution squares."""
        squares = [(i, i) for i in self.involutions]
        return squares + [tuple(r) for r in self.relators]

    def letter(self, name: str) -> int:
        """Index of a generator by name."""
        try:
            return self.generators.index(name)
        except ValueError:
            raise KeyError(f"unknown generator '{name}'") from None

    def parse_word(self, text: str) -> Word:
        """Parse a space-separated word; 'x^-1' denotes the formal inverse of x."""
        letters: list[int] = []
        for token in text.split():
            if token in ("e", "1"):
                continue
            if token.endswith("^-1"):
                letters.append(self.inverses[self.letter(token[:-3])])
            else:
                letters.append(self.letter(token))
        return tuple(letters)

    def format_word(self, word: Word) -> str:
        """Space-separated generator names, 'e' for the empty word."""
        return " ".join(self.generators[s] for s in word) if word else "e"

    def content_hash(self) -> str:
        """Stable sha256 of the presentation's defining data."""
        payload = json.dumps(
            {
                "kind": self.kind.value,
                "generators": list(self.generators),
                "inverses": list(self.inverses),
                "relators": [list(r) for r in self.relators],
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()


class ConeTypeId(BaseModel):
    """Approximate cone type of an element at finite depth."""

    model_config = ConfigDict(frozen=True)

    id: int = Field(description="Hash-derived identifier of the witness set")
    depth: int = Field(ge=0, description="Witness depth k")
    witness: frozenset[tuple[int, ...]] = Field(description="Normal forms h with |h| <= k extending geodesically")

    def restrict(self, depth: int) -> frozenset[tuple[int, ...]]:
        """Witness truncated to a smaller depth."""
        return frozenset(h for h in self.witness if len(h) <= depth)


class Ray(BaseModel):
    """Truncated geodesic ray given by its deepest normal form.

    The prefixes alpha_n = letters[:n] are normal forms of length n.
    """

    model_config = ConfigDict(frozen=True)

    letters: tuple[int, ...] = Field(description="Normal form of alpha_N")
    seed: int | None = Field(default=None, description="Seed of the generating stream, if random")

    @field_validator("letters")
    @classmethod
    def validate_nonempty(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        """Rays have depth at least 1."""
        if not v:
            raise ValueError("ray must have depth >= 1")
        return v

    @property
    def depth(self) -> int:
        """Depth N of the truncation."""
        return len(self.letters)

    def prefix(self, n: int) -> Word:
        """Normal form alpha_n."""
        return self.letters[:n]


class BallEnumeration(BaseModel):
    """Shortlex-ordered ball B(N) with its prefix tree.

    Element i has normal form words[i]; parents[i] indexes the element with the
    last letter removed (-1 for the identity) and letters[i] is that letter.
    Sphere n occupies indices offsets[n]:offsets[n + 1].
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    radius: int = Field(ge=0, description="Enumeration radius N")
    words: list[tuple[int, ...]] = Field(description="Normal forms in shortlex order")
    parents: np.ndarray = Field(description="(M,) parent index per element")
    letters: np.ndarray = Field(description="(M,) last letter per element")
    offsets: tuple[int, ...] = Field(description="Sphere start offsets, length radius + 2")

    @property
    def size(self) -> int:
        """Number of elements |B(N)|."""
        return len(self.words)

    @property
    def lengths(self) -> np.ndarray:
        """Word length of each element."""
        counts = np.diff(np.asarray(self.offsets))
        return np.repeat(np.arange(len(counts)), counts)

    def sphere_slice(self, n: int) -> slice:
        """Index range of the sphere S(n)."""
        return slice(self.offsets[n], self.offsets[n + 1])

    def sphere_sizes(self) -> list[int]:
        """|S(n)| for n = 0..N."""
        return [self.offsets[n + 1] - self.offsets[n] for n in range(self.radius + 1)]

    def index(self) -> dict[tuple[int, ...], int]:
        """Normal form to position lookup."""
        return {w: i for i, w in enumerate(self.words)}

    def truncated(self, radius: int) -> "BallEnumeration":
        """Restriction to B(radius)."""
        if radius > self.radius:
            raise ValueError(f"cannot truncate radius {self.radius} ball to {radius}")
        end = self.offsets[radius + 1]
        return BallEnumeration(
            radius=radius,
            words=self.words[:end],
            parents=self.parents[:end],
            letters=self.letters[:end],
            offsets=self.offsets[: radius + 2],
        )
