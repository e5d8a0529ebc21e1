"""Pytest configuration and shared fixtures for anosov-lab tests.

Provides isolated settings (cache and output under tmp_path), catalog
presentations and representations, and a temporary cache database.
"""

from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest

from src.config import settings as settings_module
from src.config.settings import CacheSettings, OutputSettings, Settings
from src.models.boundary import BoundarySample
from src.models.group import Presentation, Ray
from src.models.representation import Representation
from src.models.spectrum import PairedSpectra
from src.persistence.db import Database
from src.services.catalog import ExampleCatalog
from src.services.group_core import GroupEnumerator, build_solver


@pytest.fixture(autouse=True)
def test_settings(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Settings:
    """Install built-in defaults with cache and output redirected to tmp_path.

    Auto-used so no test reads config/settings.yaml or writes to data/.

    Returns:
        Active Settings instance
    """
    settings = Settings(
        cache=CacheSettings(directory=tmp_path / "cache", database=tmp_path / "cache" / "index.db"),
        output=OutputSettings(directory=tmp_path / "output"),
    )
    monkeypatch.setattr(settings_module, "_settings", settings)
    return settings


@pytest.fixture(autouse=True)
def setup_test_logging():
    """Configure logging for tests.

    Auto-used for all tests to ensure clean log output.
    """
    from src.config.logging import configure_logging

    configure_logging(level="DEBUG", log_format="text")


@pytest.fixture
def catalog() -> ExampleCatalog:
    """Built-in example catalog."""
    return ExampleCatalog()


@pytest.fixture
def free2(catalog: ExampleCatalog) -> Presentation:
    """Free group of rank 2."""
    return catalog.presentation("free-2")


@pytest.fixture
def surface2(catalog: ExampleCatalog) -> Presentation:
    """Genus-2 surface group."""
    return catalog.presentation("surface-g2")


@pytest.fixture
def triangle334(catalog: ExampleCatalog) -> Presentation:
    """(3,3,4) triangle Coxeter group."""
    return catalog.presentation("triangle-334")


@pytest.fixture
def free2_enumerator(free2: Presentation) -> GroupEnumerator:
    """Enumerator of the free group."""
    return build_solver(free2)[1]


@pytest.fixture
def triangle_enumerator(triangle334: Presentation) -> GroupEnumerator:
    """Enumerator of the triangle group."""
    return build_solver(triangle334)[1]


@pytest.fixture
def schottky(catalog: ExampleCatalog) -> Representation:
    """Default Schottky representation of F2 in SL(3,R)."""
    return catalog.representation("f2-schottky")


@pytest.fixture
def vinberg0(catalog: ExampleCatalog) -> Representation:
    """Hyperbolic (Fuchsian-locus) reflection representation of the (3,3,4) group."""
    return catalog.representation("triangle-334-vinberg(0)")


@pytest.fixture
def vinberg_deformed(catalog: ExampleCatalog) -> Representation:
    """Deformed convex-projective reflection representation of the (3,3,4) group."""
    return catalog.representation("triangle-334-vinberg(0.5)")


@pytest.fixture
def fuchsian2(catalog: ExampleCatalog) -> Representation:
    """Genus-2 Fuchsian representation in SL(2,R)."""
    return catalog.representation("fuchsian-g2")


@pytest.fixture
def test_database(tmp_path: Path) -> Generator[Database, None, None]:
    """Create temporary cache index database.

    Yields:
        Connected test database instance
    """
    db = Database(tmp_path / "index.db")
    db.connect()

    yield db

    db.disconnect()


def tree_paired_spectra(radius: int, tau_slope: float = 1.0, taubar_slope: float = 2.0) -> PairedSpectra:
    """Synthetic F2-shaped spectra: 4 * 3^(n-1) elements on sphere n with tau = a*n, taubar = b*n."""
    sizes = [1] + [4 * 3 ** (n - 1) for n in range(1, radius + 1)]
    lengths = np.repeat(np.arange(radius + 1), sizes)
    return PairedSpectra(
        radius=radius,
        lengths=lengths,
        tau=tau_slope * lengths.astype(float),
        taubar=taubar_slope * lengths.astype(float),
    )


@pytest.fixture
def tree_spectra() -> PairedSpectra:
    """Radius-10 synthetic tree spectra with tau = n and taubar = 2n."""
    return tree_paired_spectra(10)


def _frame(vector: np.ndarray) -> tuple[tuple[float, ...], ...]:
    """Orthonormal frame whose first column spans ``vector``."""
    q, _ = np.linalg.qr(np.column_stack([vector, np.eye(len(vector))]))
    q = q[:, : len(vector)]
    if q[:, 0] @ vector < 0:
        q[:, 0] = -q[:, 0]
    return tuple(tuple(float(x) for x in row) for row in q)


def make_sample(
    index: int,
    xi: np.ndarray,
    xibar: np.ndarray | None = None,
    order_key: float | None = None,
    tau_profile: tuple[float, ...] = (),
    taubar_profile: tuple[float, ...] = (),
    converged: bool = True,
) -> BoundarySample:
    """Hand-built boundary sample with unit xi, xibar and matching frames."""
    xi = np.asarray(xi, dtype=float) / np.linalg.norm(xi)
    bar = xi if xibar is None else np.asarray(xibar, dtype=float) / np.linalg.norm(xibar)
    frame, frame_bar = _frame(xi), _frame(bar)
    return BoundarySample(
        index=index,
        ray=Ray(letters=(0,)),
        xi=tuple(float(x) for x in xi),
        xibar=tuple(float(x) for x in bar),
        xi_hyperplane=tuple(row[-1] for row in frame),
        xibar_hyperplane=tuple(row[-1] for row in frame_bar),
        xi_frame=frame,
        xibar_frame=frame_bar,
        convergence=0.0,
        convergence_bar=0.0,
        order_key=float(index if order_key is None else order_key),
        converged=converged,
        tau_profile=tau_profile,
        taubar_profile=taubar_profile,
    )


# Markers for test categorization
def pytest_configure(config):
    """Register custom pytest markers."""
    config.addinivalue_line("markers", "unit: Unit tests (fast, synthetic data or small balls)")
    config.addinivalue_line("markers", "integration: Integration tests (full pipelines on catalog representations)")
    config.addinivalue_line("markers", "contract: Contract tests (CLI exit codes and artifact formats)")
    config.addinivalue_line("markers", "slow: Slow-running tests (deep balls, many samples)")
