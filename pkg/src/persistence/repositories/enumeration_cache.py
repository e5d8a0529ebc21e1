"""Enumeration cache repository.

Blobs are .npz archives of a ball's prefix tree and per-element spectra,
written atomically and validated by sha256 on every read.
"""

import hashlib
import os
import sqlite3
import tempfile
from datetime import datetime
from pathlib import Path

import numpy as np

from src.config.logging import get_logger
from src.models.cache import CacheEntry, CachedBall
from src.models.group import BallEnumeration
from src.models.spectrum import BallSpectra
from src.persistence.db import Database

logger = get_logger(__name__)


def _file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _padded_words(ball: BallEnumeration) -> np.ndarray:
    padded = np.full((ball.size, max(ball.radius, 1)), -1, dtype=np.int16)
    for i, word in enumerate(ball.words):
        padded[i, : len(word)] = word
    return padded


class EnumerationCacheRepository:
    """Repository for cached balls keyed by (presentation hash, representation hash, depth)."""

    def __init__(self, db: Database, directory: Path):
        """Initialize cache repository.

        Args:
            db: Connected index database
            directory: Directory holding the blobs
        """
        self.db = db
        self.directory = directory

    def _row_to_entry(self, row: sqlite3.Row) -> CacheEntry:
        return CacheEntry(
            cache_key=row["cache_key"],
            presentation_hash=row["presentation_hash"],
            representation_hash=row["representation_hash"],
            depth=row["depth"],
            blob_path=Path(row["blob_path"]),
            content_hash=row["content_hash"],
            elements=row["elements"],
            created_at=datetime.fromisoformat(row["created_at"]),
        )

    def get(self, presentation_hash: str, representation_hash: str, depth: int) -> CachedBall | None:
        """Cached ball of at least ``depth``, truncated to ``depth``.

        Entries whose blob is missing or fails the content hash are invalidated.
        """
        row = self.db.fetchone(
            """
            SELECT * FROM enumeration_cache
            WHERE presentation_hash = ? AND representation_hash = ? AND depth >= ?
            ORDER BY depth ASC LIMIT 1
            """,
            (presentation_hash, representation_hash, depth),
        )
        if row is None:
            return None
        entry = self._row_to_entry(row)
        if not entry.blob_path.is_file() or _file_sha256(entry.blob_path) != entry.content_hash:
            logger.warning("cache_entry_corrupt", key=entry.cache_key)
            self.invalidate(entry.cache_key)
            return None
        with np.load(entry.blob_path) as blob:
            offsets = tuple(int(x) for x in blob["offsets"])
            lengths = np.diff(np.asarray(offsets))
            word_lengths = np.repeat(np.arange(len(lengths)), lengths)
            words = [tuple(int(s) for s in padded[:n]) for padded, n in zip(blob["words"], word_lengths)]
            ball = BallEnumeration(
                radius=entry.depth,
                words=words,
                parents=blob["parents"].astype(np.int64),
                letters=blob["letters"].astype(np.int64),
                offsets=offsets,
            )
            spectra = BallSpectra(
                radius=entry.depth, lengths=ball.lengths, cartan=blob["cartan"], jordan=blob["jordan"]
            )
        if entry.depth > depth:
            ball = ball.truncated(depth)
            keep = ball.size
            spectra = BallSpectra(
                radius=depth, lengths=ball.lengths, cartan=spectra.cartan[:keep], jordan=spectra.jordan[:keep]
            )
        logger.info("cache_hit", key=entry.cache_key, depth=depth, elements=ball.size)
        return CachedBall(ball=ball, spectra=spectra)

    def put(
        self, presentation_hash: str, representation_hash: str, ball: BallEnumeration, spectra: BallSpectra
    ) -> CacheEntry:
        """Write a ball and its spectra; replaces an entry with the same key."""
        self.directory.mkdir(parents=True, exist_ok=True)
        key = CacheEntry.key_for(presentation_hash, representation_hash, ball.radius)
        target = self.directory / f"{presentation_hash[:16]}_{representation_hash[:16]}_{ball.radius}.npz"
        handle, temp_name = tempfile.mkstemp(dir=self.directory, suffix=".npz.tmp")
        try:
            with os.fdopen(handle, "wb") as stream:
                np.savez(
                    stream,
                    words=_padded_words(ball),
                    parents=ball.parents,
                    letters=ball.letters,
                    offsets=np.asarray(ball.offsets, dtype=np.int64),
                    cartan=spectra.cartan,
                    jordan=spectra.jordan,
                )
            os.replace(temp_name, target)
        except BaseException:
            Path(temp_name).unlink(missing_ok=True)
            raise
        entry = CacheEntry(
            cache_key=key,
            presentation_hash=presentation_hash,
            representation_hash=representation_hash,
            depth=ball.radius,
            blob_path=target,
            content_hash=_file_sha256(target),
            elements=ball.size,
        )
        self.db.execute(
            """
            INSERT OR REPLACE INTO enumeration_cache (
                cache_key, presentation_hash, representation_hash, depth,
                blob_path, content_hash, elements, created_at
            ) VALUES (?, ?, ?, ?, ?, ?, ?, ?)
            """,
            (
                entry.cache_key,
                entry.presentation_hash,
                entry.representation_hash,
                entry.depth,
                str(entry.blob_path),
                entry.content_hash,
                entry.elements,
                entry.created_at.isoformat(),
            ),
        )
        logger.info("cache_written", key=key, elements=ball.size)
        return entry

    def invalidate(self, cache_key: str) -> bool:
        """Remove an entry and its blob.

        Returns:
            True if a row was deleted
        """
        row = self.db.fetchone("SELECT blob_path FROM enumeration_cache WHERE cache_key = ?", (cache_key,))
        if row is None:
            return False
        Path(row["blob_path"]).unlink(missing_ok=True)
        self.db.execute("DELETE FROM enumeration_cache WHERE cache_key = ?", (cache_key,))
        logger.info("cache_invalidated", key=cache_key)
        return True

    def entries(self) -> list[CacheEntry]:
        """All index rows, newest first."""
        rows = self.db.fetchall("SELECT * FROM enumeration_cache ORDER BY created_at DESC")
        return [self._row_to_entry(r) for r in rows]
