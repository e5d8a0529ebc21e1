"""Unit tests for the enumeration cache repository."""

import numpy as np
import pytest

from src.persistence.repositories.enumeration_cache import EnumerationCacheRepository
from src.services.replin import BallEvaluator


@pytest.fixture
def repository(test_database, tmp_path) -> EnumerationCacheRepository:
    """Cache repository writing blobs under tmp_path."""
    return EnumerationCacheRepository(test_database, tmp_path / "blobs")


@pytest.fixture
def cached_input(schottky, free2_enumerator):
    """(presentation hash, representation hash, ball, spectra) for ball(4) of the Schottky group."""
    ball = free2_enumerator.ball(4)
    spectra = BallEvaluator(schottky).spectra(ball)
    return schottky.presentation.content_hash(), schottky.content_hash(), ball, spectra


@pytest.mark.unit
class TestEnumerationCache:
    """Tests for put, get, truncation and invalidation."""

    def test_miss_on_empty_cache(self, repository, cached_input):
        """Test that an empty index returns None."""
        p_hash, r_hash, _, _ = cached_input
        assert repository.get(p_hash, r_hash, 4) is None

    def test_round_trip(self, repository, cached_input):
        """Test that a stored ball comes back identical."""
        p_hash, r_hash, ball, spectra = cached_input
        entry = repository.put(p_hash, r_hash, ball, spectra)
        assert entry.elements == ball.size
        assert entry.blob_path.is_file()

        cached = repository.get(p_hash, r_hash, 4)
        assert cached is not None
        assert cached.ball.words == ball.words
        assert cached.ball.offsets == ball.offsets
        assert np.array_equal(cached.ball.parents, ball.parents)
        assert np.array_equal(cached.spectra.cartan, spectra.cartan)
        assert np.array_equal(cached.spectra.jordan, spectra.jordan)

    def test_deeper_entry_is_truncated(self, repository, cached_input):
        """Test that a request for a smaller radius is served from a deeper ball."""
        p_hash, r_hash, ball, spectra = cached_input
        repository.put(p_hash, r_hash, ball, spectra)
        cached = repository.get(p_hash, r_hash, 2)
        assert cached is not None
        assert cached.ball.radius == 2
        assert cached.ball.size == 17
        assert cached.spectra.cartan.shape[0] == 17
        assert np.array_equal(cached.spectra.cartan, spectra.cartan[:17])

    def test_shallower_entry_is_not_used(self, repository, cached_input):
        """Test a miss when only smaller balls are cached."""
        p_hash, r_hash, ball, spectra = cached_input
        repository.put(p_hash, r_hash, ball, spectra)
        assert repository.get(p_hash, r_hash, 5) is None

    def test_corrupt_blob_is_invalidated(self, repository, cached_input):
        """Test that a blob failing its content hash is dropped."""
        p_hash, r_hash, ball, spectra = cached_input
        entry = repository.put(p_hash, r_hash, ball, spectra)
        entry.blob_path.write_bytes(b"not a numpy archive")
        assert repository.get(p_hash, r_hash, 4) is None
        assert repository.entries() == []
        assert not entry.blob_path.exists()

    def test_put_replaces_same_key(self, repository, cached_input):
        """Test that writing the same key twice keeps one row."""
        p_hash, r_hash, ball, spectra = cached_input
        repository.put(p_hash, r_hash, ball, spectra)
        repository.put(p_hash, r_hash, ball, spectra)
        entries = repository.entries()
        assert len(entries) == 1
        assert entries[0].cache_key == f"{p_hash}:{r_hash}:4"

    def test_invalidate(self, repository, cached_input):
        """Test explicit invalidation and its return value."""
        p_hash, r_hash, ball, spectra = cached_input
        entry = repository.put(p_hash, r_hash, ball, spectra)
        assert repository.invalidate(entry.cache_key) is True
        assert repository.invalidate(entry.cache_key) is False
        assert repository.get(p_hash, r_hash, 4) is None
