"""Unit tests for the built-in example catalog."""

import numpy as np
import pytest

from src.config.defaults import DEFAULT_CATALOG, DEFAULT_PRESENTATIONS
from src.services.anosov import symmetric_spectra_check
from src.services.catalog import CatalogError, ExampleCatalog, schottky_rep
from src.services.group_core import build_solver
from src.services.replin import BallEvaluator, check_relations


@pytest.mark.unit
class TestCatalogNames:
    """Tests for name resolution."""

    def test_names_are_sorted(self, catalog):
        """Test that the listing is sorted and contains the base families."""
        names = catalog.names()
        assert names == sorted(names)
        assert {"fuchsian-g2", "fuchsian-g2-sym2", "triangle-334-vinberg", "f2-schottky"} <= set(names)

    @pytest.mark.parametrize(
        "name, dimension, presentation",
        [
            ("fuchsian-g2", 2, "surface-g2"),
            ("fuchsian-g3", 2, "surface-g3"),
            ("fuchsian-g2-sym2", 3, "surface-g2"),
            ("triangle-334-vinberg(0.7)", 3, "triangle-334"),
            ("triangle-334-vinberg", 3, "triangle-334"),
            ("f2-schottky(2)", 3, "free-2"),
        ],
    )
    def test_representations_resolve(self, catalog, name, dimension, presentation):
        """Test dimension, presentation and relators of every family."""
        rep = catalog.representation(name)
        assert rep.dimension == dimension
        assert rep.presentation.content_hash() == catalog.presentation(presentation).content_hash()
        assert check_relations(rep) < 1e-8

    def test_every_entry_builds_with_its_default(self, catalog):
        """Test that each listed name resolves, parameterized ones at their default parameter."""
        for name in catalog.names():
            default = DEFAULT_CATALOG[name]
            rep = catalog.representation(name)
            if default is not None:
                assert rep.name == catalog.representation(f"{name}({default})").name
        assert catalog.representation("f2-schottky").name == "f2-schottky(1.5)"

    def test_named_presentations(self, catalog):
        """Test that named presentations keep their catalog name."""
        for name in DEFAULT_PRESENTATIONS:
            assert catalog.presentation(name).name == name

    def test_unknown_name(self, catalog):
        """Test CatalogError for names that are neither entries nor files."""
        with pytest.raises(CatalogError) as exc_info:
            catalog.representation("hitchin-g7")
        assert "fuchsian-g2" in str(exc_info.value)

    def test_schottky_parameter_range(self):
        """Test that overlapping isometric circles are refused."""
        with pytest.raises(CatalogError):
            schottky_rep(0.5)

    def test_fuchsian_genus_range(self, catalog):
        """Test that unsupported genera are refused."""
        with pytest.raises(CatalogError):
            catalog.representation("fuchsian-g9")

    def test_inline_presentation(self, catalog):
        """Test that unnamed references are parsed as presentation documents."""
        presentation = catalog.presentation("triangle 3 3 4")
        assert presentation.content_hash() == catalog.presentation("triangle-334").content_hash()

    def test_representation_file(self, catalog, tmp_path):
        """Test loading a representation file through the catalog."""
        path = tmp_path / "diag.rep"
        path.write_text("dim 2\nfield R\npresentation free-2\na 2 0 0 0.5\nb 1.25 0.75 0.75 1.25\n")
        rep = catalog.representation(str(path))
        assert rep.name == "diag"
        assert rep.dimension == 2


@pytest.mark.unit
class TestReferences:
    """Tests for reference Fuchsian representations."""

    def test_surface_reference(self, catalog, surface2):
        """Test that surface groups order through their Fuchsian representation."""
        reference = catalog.reference(surface2)
        assert reference is not None
        assert reference.dimension == 2

    def test_triangle_reference(self, catalog, triangle334):
        """Test that triangle groups order through the undeformed reflection group."""
        reference = catalog.reference(triangle334)
        assert reference is not None
        assert reference.name == "triangle-334-vinberg(0)"

    def test_free_has_no_reference(self, catalog, free2):
        """Test that free groups fall back to letter ordering."""
        assert catalog.reference(free2) is None


@pytest.mark.unit
class TestSymmetricLocus:
    """Tests for representations on the Fuchsian locus."""

    @pytest.mark.parametrize("name", ["triangle-334-vinberg(0)", "fuchsian-g2-sym2"])
    def test_symmetric_spectra(self, name):
        """Test tau_1 = tau_2 on the ball for O(2,1)-valued representations."""
        catalog = ExampleCatalog()
        rep = catalog.representation(name)
        _, enumerator = build_solver(rep.presentation)
        spectra = BallEvaluator(rep).spectra(enumerator.ball(3))
        assert symmetric_spectra_check(spectra) < 1e-8

    def test_deformation_breaks_symmetry(self, vinberg_deformed, triangle_enumerator):
        """Test that t != 0 leaves the Fuchsian locus."""
        spectra = BallEvaluator(vinberg_deformed).spectra(triangle_enumerator.ball(6))
        assert symmetric_spectra_check(spectra) > 1e-3

    def test_deformation_is_deterministic(self, catalog):
        """Test that the same parameter yields identical matrices."""
        a = catalog.representation("triangle-334-vinberg(0.5)")
        b = catalog.representation("triangle-334-vinberg(0.5)")
        assert a.content_hash() == b.content_hash()
        assert all(np.array_equal(x, y) for x, y in zip(a.matrices, b.matrices))
