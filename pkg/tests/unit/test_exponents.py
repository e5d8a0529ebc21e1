"""Unit tests for critical exponents, the critical curve and intersections.

Synthetic tree spectra have 4 * 3^(n-1) elements on sphere n with tau = n and
taubar = 2n, so every exponent is known in closed form.
"""

import math

import numpy as np
import pytest

from src.models.exponents import Functional2D, QCurve, QCurvePoint
from src.models.spectrum import PairedSpectra
from src.services.errors import InputError
from src.services.exponents import (
    HILBERT,
    TAU,
    TAUBAR,
    EmptyPeriodWindowError,
    InsufficientCurveError,
    PositivityError,
    WindowTooSmallError,
    abscissa_of_convergence,
    admissible_beta_bracket,
    convexity_defect,
    critical_exponent,
    cross_validate,
    default_period_cutoff,
    hinf,
    hinf_functional,
    hmin,
    intersection,
    is_convex,
    phi_infinity,
    qcurve,
    swap_symmetry_defect,
)
from tests.conftest import tree_paired_spectra

LOG3 = math.log(3.0)


def hyperbola_curve(count: int = 16, k: float = 1.0) -> QCurve:
    """Points of s * u = k sampled away from both axes."""
    points = []
    for theta in np.linspace(0.1, math.pi / 2 - 0.1, count):
        r = math.sqrt(k / (math.cos(theta) * math.sin(theta)))
        points.append(QCurvePoint(theta=float(theta), s=r * math.cos(theta), u=r * math.sin(theta), h_raw=r))
    return QCurve(points=points, radius=10)


@pytest.mark.unit
class TestCriticalExponent:
    """Tests for slope-fit and poincare-root estimates."""

    def test_poincare_root_is_exact_on_tree(self, tree_spectra):
        """Test h_tau = log 3 when shells grow by 9 e^{-2s}."""
        estimate = critical_exponent(TAU, tree_spectra, "poincare-root")
        assert estimate.value == pytest.approx(LOG3, rel=1e-9)
        assert estimate.bracket is not None
        assert estimate.bracket[0] <= LOG3 <= estimate.bracket[1] + 1e-9

    def test_slope_fit_on_tree(self, tree_spectra):
        """Test the counting-window fit and its window of 7 sphere levels."""
        estimate = critical_exponent(TAU, tree_spectra, "slope-fit")
        assert estimate.value == pytest.approx(LOG3, abs=0.1)
        assert estimate.window == pytest.approx((3.0, 9.0))
        assert estimate.levels == 7
        assert estimate.nonpositive == 0

    def test_scaling(self, tree_spectra):
        """Test h_{c phi} = h_phi / c."""
        taubar = critical_exponent(TAUBAR, tree_spectra, "poincare-root")
        hilbert = critical_exponent(HILBERT, tree_spectra, "poincare-root")
        assert taubar.value == pytest.approx(LOG3 / 2, rel=1e-9)
        assert hilbert.value == pytest.approx(LOG3 / 1.5, rel=1e-9)

    def test_hinf_and_hmin(self, tree_spectra):
        """Test max{beta tau, taubar} = taubar and min{tau, taubar} = tau on the tree."""
        assert hinf(1.0, tree_spectra, "poincare-root").value == pytest.approx(LOG3 / 2, rel=1e-9)
        assert hinf(0.5, tree_spectra, "poincare-root").value == pytest.approx(LOG3 / 2, rel=1e-9)
        assert hmin(tree_spectra, "poincare-root").value == pytest.approx(LOG3, rel=1e-9)

    def test_cross_validation_agrees(self, tree_spectra):
        """Test that both estimators agree within the fit tolerance."""
        result = cross_validate(TAU, tree_spectra)
        assert result.value == result.slope_fit.value
        assert result.relative_discrepancy < 0.1
        assert result.uncertainty >= result.discrepancy

    def test_positivity_violation(self):
        """Test PositivityError when phi is negative on most elements."""
        with pytest.raises(PositivityError):
            critical_exponent(TAU, tree_paired_spectra(6, tau_slope=-1.0), "slope-fit")

    def test_window_too_small(self):
        """Test WindowTooSmallError for shallow balls."""
        with pytest.raises(WindowTooSmallError):
            critical_exponent(TAU, tree_paired_spectra(4), "slope-fit")
        with pytest.raises(WindowTooSmallError):
            critical_exponent(TAU, tree_paired_spectra(3), "poincare-root")

    def test_abscissa_bracket_shrinks(self, tree_spectra):
        """Test that more bisection steps give a tighter bracket."""
        values = tree_spectra.tau[tree_spectra.lengths > 0]
        lengths = tree_spectra.lengths[tree_spectra.lengths > 0]
        coarse = abscissa_of_convergence(values, lengths, 10, 5)
        fine = abscissa_of_convergence(values, lengths, 10, 60)
        assert fine[1] - fine[0] < coarse[1] - coarse[0]
        assert coarse[0] <= LOG3 <= coarse[1]

    def test_hinf_beta_range(self):
        """Test that beta must lie in (0, 1]."""
        with pytest.raises(InputError):
            hinf_functional(0.0)
        with pytest.raises(InputError):
            hinf_functional(1.5)

    def test_zero_functional(self):
        """Test that the zero functional is rejected."""
        with pytest.raises(ValueError):
            Functional2D(s=0.0, u=0.0)


@pytest.mark.unit
class TestQCurve:
    """Tests for the critical curve and its diagnostics."""

    def test_tree_curve_is_a_line(self, tree_spectra):
        """Test that every sampled point satisfies s + 2u = log 3."""
        curve = qcurve(tree_spectra, method="poincare-root")
        assert len(curve.points) == 16
        assert curve.skipped == []
        for point in curve.points:
            assert point.s + 2 * point.u == pytest.approx(LOG3, rel=1e-8)
        assert is_convex(curve)

    def test_swapped_spectra_reflect_the_curve(self, tree_spectra):
        """Test h'(theta) = h(pi/2 - theta) after exchanging tau and taubar."""
        curve = qcurve(tree_spectra, method="poincare-root")
        mirrored = qcurve(tree_spectra.swapped(), method="poincare-root")
        forward = [p.h_raw for p in curve.points]
        backward = [p.h_raw for p in reversed(mirrored.points)]
        assert np.allclose(forward, backward, rtol=1e-8)
        assert swap_symmetry_defect(curve) > 0.1

    def test_dual_directions_point_outward(self, tree_spectra):
        """Test unit normals with positive pairing against the point."""
        curve = qcurve(tree_spectra, method="poincare-root")
        for point in curve.points:
            normal = np.array(point.dual_direction)
            assert np.linalg.norm(normal) == pytest.approx(1.0)
            assert normal @ np.array([point.s, point.u]) > 0

    def test_hyperbola_is_convex_and_symmetric(self):
        """Test zero defects on s * u = 1."""
        curve = hyperbola_curve()
        assert convexity_defect(curve.coordinates()) == pytest.approx(0.0, abs=1e-12)
        assert swap_symmetry_defect(curve) < 1e-6

    def test_convexity_defect_detects_a_dent(self):
        """Test a positive defect when one vertex is pushed inward."""
        points = np.array([[1.0, 0.0], [0.7, 0.7], [0.2, 0.2], [-0.7, 0.7], [-1.0, 0.0]])
        assert convexity_defect(points) > 0.1


@pytest.mark.unit
class TestPhiInfinity:
    """Tests for the minimizer of |s|/beta + |u| on Q."""

    def test_symmetric_minimizer(self):
        """Test the minimizer at theta = pi/4 for beta = 1."""
        result = phi_infinity(hyperbola_curve(), 1.0)
        assert result.theta == pytest.approx(math.pi / 4, abs=5e-3)
        assert result.s == pytest.approx(1.0, abs=5e-3)
        assert result.u == pytest.approx(1.0, abs=5e-3)
        assert result.norm == pytest.approx(2.0, abs=1e-3)
        assert not result.inconclusive
        assert result.tangent_misalignment < 0.05

    def test_beta_moves_the_minimizer(self):
        """Test tan theta = 2 for beta = 1/2."""
        result = phi_infinity(hyperbola_curve(), 0.5)
        assert result.theta == pytest.approx(math.atan(2.0), abs=5e-3)
        assert not result.inconclusive

    def test_minimizer_at_arc_end(self, tree_spectra):
        """Test the inconclusive flag when the minimum sits at theta = pi/2."""
        result = phi_infinity(qcurve(tree_spectra, method="poincare-root"), 1.0)
        assert result.inconclusive
        assert result.theta == pytest.approx(math.pi / 2, abs=1e-3)

    def test_too_few_points(self):
        """Test InsufficientCurveError below 8 points."""
        with pytest.raises(InsufficientCurveError):
            phi_infinity(hyperbola_curve(count=5), 1.0)


@pytest.mark.unit
class TestIntersection:
    """Tests for period-ratio averages."""

    @pytest.fixture
    def periods(self) -> PairedSpectra:
        """Three classes with taubar = 2 tau."""
        return PairedSpectra(
            radius=3,
            lengths=np.array([1, 2, 3]),
            tau=np.array([1.0, 2.0, 3.0]),
            taubar=np.array([2.0, 4.0, 6.0]),
            periods=True,
        )

    def test_intersection(self, periods):
        """Test the mean ratio and class count."""
        estimate = intersection(periods, 10.0)
        assert estimate.value == pytest.approx(2.0)
        assert estimate.count == 3

    def test_cutoff_restricts_classes(self, periods):
        """Test that only classes with tau <= t are averaged."""
        assert intersection(periods, 1.5).count == 1

    def test_default_cutoff(self, periods):
        """Test the minimal period among the longest classes."""
        assert default_period_cutoff(periods) == 3.0
        assert intersection(periods).count == 3

    def test_empty_window(self, periods):
        """Test EmptyPeriodWindowError below every period."""
        with pytest.raises(EmptyPeriodWindowError):
            intersection(periods, 0.5)

    def test_homogeneity(self):
        """Test I_{s*tau}(taubar) = I_tau(taubar) / s when the cutoff scales with tau."""
        tau = np.array([0.7, 1.3, 2.9, 3.1])
        taubar = np.array([1.1, 1.2, 4.0, 2.5])
        base = PairedSpectra(radius=4, lengths=np.arange(1, 5), tau=tau, taubar=taubar, periods=True)
        scaled = PairedSpectra(radius=4, lengths=np.arange(1, 5), tau=3.7 * tau, taubar=taubar, periods=True)
        assert intersection(scaled, 3.7 * 3.0).value == pytest.approx(intersection(base, 3.0).value / 3.7, rel=1e-12)

    def test_beta_bracket(self, periods):
        """Test (1 / I_taubar(tau), I_tau(taubar)) = (2, 2) for proportional periods."""
        assert admissible_beta_bracket(periods, 10.0) == pytest.approx((2.0, 2.0))
