"""Unit tests for representation parsing, long products and spectra."""

import math

import numpy as np
import pytest

from src.config.settings import NumericsSettings
from src.models.representation import NormalizedMatrix
from src.services.group_core import build_solver
from src.services.replin import (
    AmbiguousAttractorError,
    BallEvaluator,
    RelationDefectError,
    RepresentationParseError,
    cartan_attractor,
    cartan_oracle,
    check_relations,
    contraction_rate,
    dual_rep,
    evaluate,
    gromov_product,
    max_generator_step,
    parse_representation,
    prefix_products,
    proj_dist,
    spectral,
    sym2_lift,
    validate_relations,
    word_spectra,
)

SCHOTTKY_FILE = """
# two hyperbolic elements with unit determinant
dim 2
field R
presentation free-2
a 2 0 0 0.5
b 1.25 0.75 0.75 1.25
"""


@pytest.mark.unit
class TestParseRepresentation:
    """Tests for the representation file grammar."""

    def test_inverse_matrices_are_completed(self, catalog):
        """Test that unlisted inverse generators are inverted from their partners."""
        rep = parse_representation(SCHOTTKY_FILE, "file-rep", resolve_presentation=catalog.presentation)
        assert rep.dimension == 2
        assert np.allclose(rep.matrices[1], np.diag([0.5, 2.0]))
        assert np.allclose(rep.matrices[2] @ rep.matrices[3], np.eye(2))

    def test_explicit_presentation_overrides_line(self, free2):
        """Test that a given presentation wins over the 'presentation' line."""
        rep = parse_representation(SCHOTTKY_FILE, "file-rep", presentation=free2)
        assert rep.presentation.content_hash() == free2.content_hash()

    @pytest.mark.parametrize(
        "text",
        [
            "field R\npresentation free-2\na 1 0 0 1\nb 1 0 0 1",
            "dim 2\nfield C\npresentation free-2\na 1 0 0 1\nb 1 0 0 1",
            "dim 2\npresentation free-2\na 1 0 0\nb 1 0 0 1",
            "dim 2\npresentation free-2\na 1 0 0 x\nb 1 0 0 1",
            "dim 2\npresentation free-2\na 1 0 0 1",
            "dim 2\npresentation free-2\na 2 0 0 2\nb 1 0 0 1",
            "dim 2\npresentation free-2\nq 1 0 0 1\na 1 0 0 1\nb 1 0 0 1",
        ],
    )
    def test_rejects_malformed(self, catalog, text):
        """Test missing dim, wrong field, wrong sizes, bad numbers, missing generators and det != 1."""
        with pytest.raises(RepresentationParseError):
            parse_representation(text, "bad", resolve_presentation=catalog.presentation)

    def test_missing_presentation(self):
        """Test that a file without a presentation cannot be resolved."""
        with pytest.raises(RepresentationParseError):
            parse_representation("dim 2\na 1 0 0 1\nb 1 0 0 1", "bad")


@pytest.mark.unit
class TestRelations:
    """Tests for relator checks."""

    def test_catalog_relations_hold(self, fuchsian2, vinberg_deformed):
        """Test that catalog representations satisfy their relators."""
        assert check_relations(fuchsian2) < 1e-8
        assert validate_relations(vinberg_deformed) < 1e-8

    def test_broken_relation_is_rejected(self, vinberg0):
        """Test RelationDefectError when a generator is replaced."""
        matrices = list(vinberg0.matrices)
        matrices[0] = np.diag([-1.0, 1.0, 1.0])
        broken = vinberg0.model_copy(update={"matrices": tuple(matrices)})
        with pytest.raises(RelationDefectError):
            validate_relations(broken)


@pytest.mark.unit
class TestProducts:
    """Tests for normalized products and batched evaluation."""

    def test_identity_word(self, schottky):
        """Test that the empty word has zero Cartan projection."""
        sample = spectral(evaluate(schottky, ()))
        assert np.allclose(sample.cartan, 0.0)

    def test_normalized_product_matches_plain_product(self, schottky):
        """Test that the stored matrix times exp(log_scale) is the true product."""
        word = (0, 2, 0, 3, 3)
        m = evaluate(schottky, word)
        assert np.isclose(np.linalg.norm(m.matrix), 1.0)
        assert np.allclose(m.true_matrix(), schottky.product(word))

    def test_cartan_matches_extended_precision_oracle(self, schottky):
        """Test long products against the mpmath oracle."""
        word = (0, 2) * 6
        sample = spectral(evaluate(schottky, word), word, dual=evaluate(dual_rep(schottky), word))
        assert np.allclose(sample.cartan, cartan_oracle(schottky, word, bits=512), atol=1e-6)

    def test_extended_precision_agrees(self, schottky):
        """Test that the mpmath path reproduces the float path on moderate words."""
        word = (0, 2, 1, 3) * 5
        plain = evaluate(schottky, word)
        extended = evaluate(
            schottky, word, NumericsSettings(extended_precision=True, extended_length_threshold=4)
        )
        assert math.isclose(plain.log_scale, extended.log_scale, rel_tol=1e-9)

    def test_ball_evaluator_matches_single_words(self, schottky, free2):
        """Test batched spectra against per-word evaluation."""
        _, enumerator = build_solver(free2)
        ball = enumerator.ball(4)
        spectra = BallEvaluator(schottky).spectra(ball)
        single = word_spectra(schottky, ball.words[1:])
        assert np.allclose(spectra.cartan[1:], single.cartan, atol=1e-9)
        assert np.allclose(spectra.cartan.sum(axis=1), 0.0, atol=1e-9)

    def test_prefix_products(self, schottky):
        """Test one row per prefix including the identity."""
        products = prefix_products(schottky, (0, 2, 0))
        assert products.size == 4
        assert products.dual_matrices is not None
        assert np.allclose(products.element(3).true_matrix(), schottky.product((0, 2, 0)))


@pytest.mark.unit
class TestSpectra:
    """Tests for Cartan and Jordan projections."""

    def test_jordan_of_diagonal(self, catalog):
        """Test lambda of a diagonal generator."""
        rep = parse_representation(SCHOTTKY_FILE, "file-rep", resolve_presentation=catalog.presentation)
        sample = spectral(evaluate(rep, (0,)))
        assert np.allclose(sample.jordan, (math.log(2.0), -math.log(2.0)))
        assert np.allclose(sample.cartan, sample.jordan)

    def test_dual_swaps_gaps(self, vinberg_deformed):
        """Test tau_1(rho* g) = tau_2(rho g)."""
        word = (0, 1, 2, 1, 0, 2)
        sample = spectral(evaluate(vinberg_deformed, word))
        dual = spectral(evaluate(dual_rep(vinberg_deformed), word))
        assert math.isclose(dual.cartan_gaps[0], sample.cartan_gaps[1], abs_tol=1e-9)
        assert math.isclose(dual.jordan_gaps[0], sample.jordan_gaps[1], abs_tol=1e-9)

    def test_sym2_lift_is_symmetric(self, fuchsian2):
        """Test tau_1 = tau_2 on the Sym2 lift of a Fuchsian representation."""
        lifted = sym2_lift(fuchsian2)
        word = (0, 2, 4, 6, 1)
        sample = spectral(evaluate(lifted, word))
        base = spectral(evaluate(fuchsian2, word))
        assert lifted.dimension == 3
        assert math.isclose(sample.cartan_gaps[0], sample.cartan_gaps[1], abs_tol=1e-7)
        assert math.isclose(sample.cartan[0], 2 * base.cartan[0], rel_tol=1e-9)

    def test_contraction_rate_matches_jordan_gap(self, schottky):
        """Test that g^n v approaches g+ at rate -tau_1(lambda(g))."""
        word = (0,)
        g = schottky.product(word)
        gap = spectral(evaluate(schottky, word)).jordan_gaps[0]
        rate = contraction_rate(g, np.array([0.3, 0.5, 0.8]), n_range=(1, 6))
        assert math.isclose(rate, -gap, rel_tol=0.05)


@pytest.mark.unit
class TestProjectiveGeometry:
    """Tests for attractors, distances and Gromov products."""

    def test_proj_dist(self):
        """Test sine distance and scale invariance."""
        assert proj_dist(np.array([1.0, 0.0]), np.array([-3.0, 0.0])) == pytest.approx(0.0)
        assert proj_dist(np.array([1.0, 0.0]), np.array([1.0, 1.0])) == pytest.approx(math.sqrt(0.5))

    def test_attractor_of_diagonal(self):
        """Test U1 of diag(e^2, 1, e^-2)."""
        diagonal = np.diag([1.0, math.exp(-2), math.exp(-4)])
        m = NormalizedMatrix(matrix=diagonal / np.linalg.norm(diagonal), log_scale=2.0)
        assert np.allclose(cartan_attractor(m), [1.0, 0.0, 0.0])

    def test_ambiguous_attractor(self):
        """Test that a repeated top singular value has no attractor."""
        m = NormalizedMatrix(matrix=np.eye(3) / math.sqrt(3), log_scale=0.0)
        with pytest.raises(AmbiguousAttractorError) as exc_info:
            cartan_attractor(m)
        assert exc_info.value.gap < 1e-6

    def test_gromov_product_is_clamped(self):
        """Test the floor for a line inside the hyperplane."""
        covector = np.array([1.0, 0.0, 0.0])
        assert gromov_product(covector, np.array([0.0, 1.0, 0.0]), floor=-50.0) == -50.0
        assert gromov_product(covector, np.array([1.0, 0.0, 0.0])) == pytest.approx(0.0)

    def test_max_generator_step(self, schottky):
        """Test the coarse-stability bound against per-generator Cartan projections."""
        inverses = schottky.presentation.inverses
        top = [spectral(evaluate(schottky, (s,))).cartan[0] for s in range(schottky.presentation.rank)]
        expected = max(top[s] + top[inverses[s]] for s in range(len(top)))
        assert max_generator_step(schottky) == pytest.approx(expected)
        assert expected >= 2 * top[0]
