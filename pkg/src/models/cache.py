"""Enumeration cache entry model."""

from datetime import datetime, timezone
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field

from src.models.group import BallEnumeration
from src.models.spectrum import BallSpectra


class CacheEntry(BaseModel):
    """Index row describing one cached ball.

    Validation Rules:
    - elements > 0
    - content_hash is the sha256 of the blob file
    """

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "cache_key": "3f1c...:9ab0...:10",
                "presentation_hash": "3f1c...",
                "representation_hash": "9ab0...",
                "depth": 10,
                "blob_path": "data/cache/3f1c_9ab0_10.npz",
                "content_hash": "e3b0...",
                "elements": 1441,
                "created_at": "2025-01-01T00:00:00Z",
            }
        }
    )

    cache_key: str
    presentation_hash: str
    representation_hash: str
    depth: int = Field(ge=0)
    blob_path: Path
    content_hash: str
    elements: int = Field(gt=0)
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    @staticmethod
    def key_for(presentation_hash: str, representation_hash: str, depth: int) -> str:
        """Cache key of an input triple."""
        return f"{presentation_hash}:{representation_hash}:{depth}"


class CachedBall(BaseModel):
    """A ball with the spectra of one representation."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    ball: BallEnumeration
    spectra: BallSpectra
