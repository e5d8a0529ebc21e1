"""Unit tests for presentations, the word problem and ball enumeration."""

import pytest

from src.config.settings import EnumerationSettings
from src.models.group import PresentationKind
from src.services.group_core import (
    EnumerationLimitError,
    GroupEnumerator,
    PresentationParseError,
    RayConstructionError,
    WordProblemSolver,
    build_solver,
    free_reduce,
    parse_presentation,
    surface_presentation,
    triangle_presentation,
)


@pytest.mark.unit
class TestParsePresentation:
    """Tests for the presentation grammar."""

    def test_one_line_forms(self):
        """Test the three one-line families."""
        free = parse_presentation("free rank=2")
        surface = parse_presentation("surface genus=2")
        triangle = parse_presentation("triangle 3 3 4")

        assert free.kind == PresentationKind.FREE
        assert free.generators == ("a", "A", "b", "B")
        assert surface.generators == ("a1", "A1", "b1", "B1", "a2", "A2", "b2", "B2")
        assert len(surface.relators[0]) == 8
        assert triangle.involutions == (0, 1, 2)
        assert len(triangle.relators) == 3

    def test_multi_line_form_with_comments(self):
        """Test 'kind' header with parameter lines and comments."""
        text = "# genus two\nkind surface\ngenus 2  # closed surface\n"
        presentation = parse_presentation(text, name="mine")

        assert presentation.name == "mine"
        assert presentation.content_hash() == surface_presentation(2).content_hash()

    def test_triangle_orders_line(self):
        """Test 'orders' parameter line for triangle groups."""
        presentation = parse_presentation("kind triangle\norders 3, 3, 4")
        assert presentation.parameters["orders"] == [3, 3, 4]

    @pytest.mark.parametrize(
        "text",
        ["", "cube rank=2", "surface genus=1", "triangle 3 3 3", "triangle 3 4", "free rank=x"],
    )
    def test_rejects_malformed(self, text):
        """Test that unknown families, bad parameters and Euclidean triangles are rejected."""
        with pytest.raises(PresentationParseError):
            parse_presentation(text)

    def test_extra_relator_unknown_generator(self):
        """Test that a relator with an unknown letter is rejected."""
        with pytest.raises(PresentationParseError):
            parse_presentation("free rank=2\nrelator a q")

    def test_content_hash_ignores_name(self):
        """Test that renaming keeps the hash stable."""
        a = parse_presentation("free rank=2", name="x")
        b = parse_presentation("free rank=2", name="y")
        assert a.content_hash() == b.content_hash()

    def test_word_parsing_and_formatting(self, surface2):
        """Test x^-1 tokens and identity formatting."""
        word = surface2.parse_word("a1 b1^-1 e")
        assert word == (0, 3)
        assert surface2.format_word(word) == "a1 B1"
        assert surface2.format_word(()) == "e"
        assert surface2.inverse_word(word) == (2, 1)


@pytest.mark.unit
class TestWordProblem:
    """Tests for reduction and normal forms."""

    def test_free_reduce(self, free2):
        """Test cancellation of adjacent inverse pairs."""
        assert free_reduce((0, 1, 2, 0, 1, 2), free2.inverses) == (2, 2)

    def test_surface_relator_is_trivial(self, surface2):
        """Test that the commutator relator and its rotations reduce to the identity."""
        solver = WordProblemSolver(surface2)
        relator = surface2.relators[0]
        assert solver.normal_form(relator) == ()
        assert solver.normal_form(relator[3:] + relator[:3]) == ()

    def test_surface_inverse_pairs_cancel(self, surface2):
        """Test that g g^-1 reduces to the identity."""
        solver = WordProblemSolver(surface2)
        g = (0, 2, 4, 7)
        assert solver.multiply(g, solver.inverse(g)) == ()

    def test_triangle_involutions(self, triangle334):
        """Test r_i^2 = 1 and (r1 r2)^2 = r2 r1 in the (3,3,4) group."""
        solver = WordProblemSolver(triangle334)
        assert solver.normal_form((0, 0)) == ()
        assert solver.word_length((0, 1, 0, 1)) == 2
        assert solver.word_length((0, 1) * 3) == 0

    def test_normal_forms_are_geodesic(self, surface2):
        """Test that reducing a word never increases its length."""
        solver = WordProblemSolver(surface2)
        word = (0, 2, 1, 3, 4, 6, 5)
        reduced = solver.normal_form(word)
        assert len(reduced) <= len(word)
        assert solver.is_normal_form(reduced)


@pytest.mark.unit
class TestBallEnumeration:
    """Tests for GroupEnumerator balls and spheres."""

    def test_free_sphere_sizes(self, free2_enumerator):
        """Test |S(n)| = 4 * 3^(n-1) in F2."""
        ball = free2_enumerator.ball(5)
        assert ball.sphere_sizes() == [1, 4, 12, 36, 108, 324]

    def test_surface_sphere_sizes(self, surface2):
        """Test the first spheres of the genus-2 surface group."""
        _, enumerator = build_solver(surface2)
        assert enumerator.ball(3).sphere_sizes() == [1, 8, 56, 392]

    def test_triangle_sphere_sizes(self, triangle_enumerator):
        """Test the first spheres of the (3,3,4) triangle group."""
        assert triangle_enumerator.ball(3).sphere_sizes() == [1, 3, 6, 10]

    def test_shortlex_order_and_prefix_tree(self, free2_enumerator):
        """Test that parents and last letters rebuild every word."""
        ball = free2_enumerator.ball(3)
        for i in range(1, ball.size):
            assert ball.words[ball.parents[i]] + (int(ball.letters[i]),) == ball.words[i]
        for n in range(1, 4):
            sphere = ball.words[ball.sphere_slice(n)]
            assert sphere == sorted(sphere)

    def test_ball_is_extended_incrementally(self, free2_enumerator):
        """Test that smaller balls are truncations of larger ones."""
        small = free2_enumerator.ball(2)
        large = free2_enumerator.ball(4)
        again = free2_enumerator.ball(2)
        assert again.words == small.words
        assert large.words[: small.size] == small.words

    def test_element_budget(self, free2):
        """Test EnumerationLimitError with the last completed radius and a partial ball."""
        solver = WordProblemSolver(free2)
        enumerator = GroupEnumerator(solver, EnumerationSettings(max_elements=50))
        with pytest.raises(EnumerationLimitError) as exc_info:
            enumerator.ball(5)
        assert exc_info.value.completed_radius == 2
        assert exc_info.value.partial is not None
        assert exc_info.value.partial.size == 17


@pytest.mark.unit
class TestConeTypesAndConjugacy:
    """Tests for cone types and conjugacy representatives."""

    def test_free_cone_type_census(self, free2_enumerator):
        """Test that F2 has the identity cone plus one cone per last letter."""
        assert free2_enumerator.cone_type_census(3, 2) == 5

    def test_same_last_letter_same_cone(self, free2_enumerator):
        """Test that cone types in F2 depend only on the last letter."""
        assert free2_enumerator.cone_type((0, 2, 0), 2).id == free2_enumerator.cone_type((2, 0), 2).id
        assert free2_enumerator.cone_type((0,), 2).id != free2_enumerator.cone_type((2,), 2).id

    def test_free_conjugacy_representatives(self, free2_enumerator):
        """Test 4 classes of length 1 and 8 of length 2 in F2."""
        reps = free2_enumerator.conjugacy_reps(2)
        assert len(reps) == 12
        assert sum(1 for w in reps if len(w) == 1) == 4

    def test_identify_inverse_merges_classes(self, free2_enumerator):
        """Test that identifying inverses halves the length-1 classes."""
        reps = free2_enumerator.conjugacy_reps(1, identify_inverse=True)
        assert len(reps) == 2


@pytest.mark.unit
class TestRays:
    """Tests for geodesic and periodic rays."""

    def test_free_rays_are_reduced(self, free2_enumerator, free2):
        """Test depth and free reduction of random rays."""
        rays = free2_enumerator.geodesic_rays(10, 5, seed=3)
        assert len(rays) == 5
        for ray in rays:
            assert ray.depth == 10
            assert free2.is_freely_reduced(ray.letters)

    def test_rays_are_seeded(self, free2_enumerator):
        """Test that the same seed reproduces the same rays."""
        first = free2_enumerator.geodesic_rays(8, 4, seed=11)
        second = free2_enumerator.geodesic_rays(8, 4, seed=11)
        assert [r.letters for r in first] == [r.letters for r in second]

    def test_surface_rays_are_normal_forms(self, surface2):
        """Test that every prefix of a surface ray is a normal form."""
        solver, enumerator = build_solver(surface2)
        for ray in enumerator.geodesic_rays(8, 3, seed=0):
            assert solver.is_normal_form(ray.letters)

    def test_rays_longer_than_the_window(self, surface2):
        """Test window-local normal forms beyond the window and exact ones when it covers the ray."""
        solver, enumerator = build_solver(surface2)
        for ray in enumerator.geodesic_rays(14, 3, seed=2, window=6):
            assert ray.depth == 14
            assert all(solver.is_normal_form(ray.letters[i : i + 6]) for i in range(14 - 6 + 1))
        for ray in enumerator.geodesic_rays(14, 3, seed=2, window=14):
            assert solver.is_normal_form(ray.letters)

    def test_periodic_ray(self, free2_enumerator):
        """Test powers of a cyclically reduced word."""
        ray = free2_enumerator.periodic_ray((0, 2), 6)
        assert ray.letters == (0, 2, 0, 2, 0, 2)

    def test_periodic_ray_rejects_cancelling_word(self, free2_enumerator):
        """Test that a word whose powers cancel is rejected."""
        with pytest.raises(RayConstructionError):
            free2_enumerator.periodic_ray((0, 1), 6)


@pytest.mark.unit
def test_triangle_presentation_rejects_euclidean():
    """Test that (3,3,3) is refused as non-hyperbolic."""
    with pytest.raises(PresentationParseError):
        triangle_presentation(3, 3, 3)
