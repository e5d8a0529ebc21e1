"""SQLite index for on-disk enumeration caches.

Rows describe cached blobs; the blobs themselves live next to the database as
numpy archives.
"""

import sqlite3
from pathlib import Path

from src.config.logging import get_logger

logger = get_logger(__name__)


SCHEMA_SQL = """
-- One row per cached ball: normal forms plus spectra of one representation
CREATE TABLE IF NOT EXISTS enumeration_cache (
    cache_key TEXT PRIMARY KEY,
    presentation_hash TEXT NOT NULL,
    representation_hash TEXT NOT NULL,
    depth INTEGER NOT NULL CHECK (depth >= 0),
    blob_path TEXT NOT NULL,
    content_hash TEXT NOT NULL,  -- sha256 of the blob file
    elements INTEGER NOT NULL CHECK (elements > 0),
    created_at TEXT NOT NULL      -- ISO 8601 UTC
);

CREATE INDEX IF NOT EXISTS idx_cache_inputs ON enumeration_cache(presentation_hash, representation_hash, depth DESC);
"""


class Database:
    """SQLite connection manager with schema initialization."""

    def __init__(self, db_path: Path):
        """Initialize database handle.

        Args:
            db_path: Path to SQLite database file
        """
        self.db_path = db_path
        self._connection: sqlite3.Connection | None = None

    def connect(self) -> None:
        """Open the connection and create the schema if needed."""
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self._connection = sqlite3.connect(self.db_path)
        self._connection.row_factory = sqlite3.Row
        self._connection.executescript(SCHEMA_SQL)
        self._connection.commit()
        logger.debug("database_connected", path=str(self.db_path))

    def disconnect(self) -> None:
        """Close the connection."""
        if self._connection:
            self._connection.close()
            self._connection = None
            logger.debug("database_disconnected")

    def get_connection(self) -> sqlite3.Connection:
        """Active connection.

        Raises:
            RuntimeError: If database not connected
        """
        if not self._connection:
            raise RuntimeError("Database not connected. Call connect() first.")
        return self._connection

    def execute(self, query: str, params: tuple = ()) -> sqlite3.Cursor:
        """Execute one statement and commit."""
        conn = self.get_connection()
        cursor = conn.execute(query, params)
        conn.commit()
        return cursor

    def fetchone(self, query: str, params: tuple = ()) -> sqlite3.Row | None:
        """Execute query and fetch one row."""
        return self.get_connection().execute(query, params).fetchone()

    def fetchall(self, query: str, params: tuple = ()) -> list[sqlite3.Row]:
        """Execute query and fetch all rows."""
        return list(self.get_connection().execute(query, params).fetchall())

    def __enter__(self) -> "Database":
        self.connect()
        return self

    def __exit__(self, *exc: object) -> None:
        self.disconnect()
