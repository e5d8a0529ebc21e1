"""Counting-based critical exponents and the critical curve Q.

Every estimator counts enumerated elements gamma by phi(a(gamma)) and reads
the exponential growth rate off a truncation-safe window, or locates the
abscissa of convergence of the truncated Poincare series.
"""

import math

import numpy as np
from scipy import stats
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

from src.config.logging import get_logger
from src.config.settings import ExponentSettings, get_settings
from src.models.anosov import IsospectralRow
from src.models.exponents import (
    ChainInequality,
    CombinedFunctional,
    CrossValidation,
    ExponentEstimate,
    ExponentMethod,
    Functional,
    Functional2D,
    IntersectionEstimate,
    PhiInfinityResult,
    QCurve,
    QCurvePoint,
    SkippedDirection,
    TheoremBReport,
)
from src.models.representation import Representation
from src.models.spectrum import BallSpectra, PairedSpectra
from src.services.anosov import gap_isospectral_check, sphere_minima, supporting_line
from src.services.errors import HypothesisViolatedError, InputError, NumericError
from src.services.group_core import GroupEnumerator
from src.services.replin import BallEvaluator

logger = get_logger(__name__)

TAU = Functional2D(s=1.0, u=0.0)
TAUBAR = Functional2D(s=0.0, u=1.0)
HILBERT = Functional2D(s=0.5, u=0.5)


class PositivityError(HypothesisViolatedError):
    """Raised when a functional is non-positive on too many enumerated elements."""

    code = "positivity"


class WindowTooSmallError(NumericError):
    """Raised when the counting window covers too few sphere levels."""

    code = "window-too-small"


class EmptyPeriodWindowError(NumericError):
    """Raised when no conjugacy class has period below t."""

    code = "empty-period-window"


class InsufficientCurveError(NumericError):
    """Raised when the sampled critical curve is too short to minimize over."""

    code = "qcurve-too-short"


class GapIsospectralError(HypothesisViolatedError):
    """Raised when two representations have numerically equal top Jordan gaps.

    Attributes:
        deviation: Max |tau_1(lambda(rho g)) - tau_1(lambda(rhobar g))| observed
    """

    code = "gap-isospectral"

    def __init__(self, message: str, deviation: float):
        super().__init__(message)
        self.deviation = deviation


# ---------------------------------------------------------------------------
# Paired data
# ---------------------------------------------------------------------------


def paired_spectra(
    rho: Representation, rhobar: Representation, enumerator: GroupEnumerator, radius: int
) -> PairedSpectra:
    """tau_1(a(rho gamma)) and tau_1(a(rhobar gamma)) over ball(radius)."""
    if rho.presentation.content_hash() != rhobar.presentation.content_hash():
        raise InputError("rho and rhobar must share the presentation")
    ball = enumerator.ball(radius)
    spectra = BallEvaluator(rho).spectra(ball)
    spectra_bar = spectra if rhobar is rho else BallEvaluator(rhobar).spectra(ball)
    return PairedSpectra(
        radius=radius, lengths=ball.lengths, tau=spectra.cartan_gap(1), taubar=spectra_bar.cartan_gap(1)
    )


def dual_pairing(spectra: BallSpectra) -> PairedSpectra:
    """(tau_1, tau_2) of one 3-dimensional representation, i.e. the pairing with its dual."""
    if spectra.cartan.shape[1] != 3:
        raise InputError(f"dual pairing needs a 3-dimensional representation, got {spectra.cartan.shape[1]}")
    return PairedSpectra(
        radius=spectra.radius, lengths=spectra.lengths, tau=spectra.cartan_gap(1), taubar=spectra.cartan_gap(2)
    )


# ---------------------------------------------------------------------------
# Critical exponents
# ---------------------------------------------------------------------------


def _positive_values(
    functional: Functional, paired: PairedSpectra, cfg: ExponentSettings
) -> tuple[np.ndarray, np.ndarray, int]:
    nontrivial = paired.lengths > 0
    values = functional.evaluate(paired.tau, paired.taubar)[nontrivial]
    lengths = paired.lengths[nontrivial]
    keep = values > 0
    nonpositive = int((~keep).sum())
    if nonpositive > cfg.positivity_allowance:
        raise PositivityError(
            f"{functional.label} is non-positive on {nonpositive} enumerated elements "
            f"(allowance {cfg.positivity_allowance})"
        )
    return values[keep], lengths[keep], nonpositive


def _slope_fit(
    functional: Functional,
    values: np.ndarray,
    lengths: np.ndarray,
    radius: int,
    nonpositive: int,
    cfg: ExponentSettings,
) -> ExponentEstimate:
    radii, minima = sphere_minima(lengths, values, 1, radius)
    if not radii:
        raise WindowTooSmallError("no enumerated element has positive value")
    mu, intercept = supporting_line(radii, minima)
    t_max = mu * radius - intercept
    if mu <= 0 or t_max <= 0:
        raise WindowTooSmallError(f"{functional.label} has no truncation-safe window (mu={mu:.3g})")
    t0, t1 = cfg.window[0] * t_max, cfg.window[1] * t_max
    slack = 1e-9 * t_max
    levels = sum(1 for n in range(1, radius + 1) if t0 - slack <= mu * n - intercept <= t1 + slack)
    if levels < cfg.min_levels:
        raise WindowTooSmallError(
            f"window [{t0:.3g}, {t1:.3g}] covers {levels} sphere levels, need {cfg.min_levels}"
        )
    grid = np.linspace(t0, t1, cfg.grid_points)
    counts = np.searchsorted(np.sort(values), grid, side="right")
    if counts[0] == 0:
        raise WindowTooSmallError(f"no element has {functional.label} <= {t0:.3g}")
    fit = stats.linregress(grid, np.log(counts))
    if fit.slope <= 0:
        raise NumericError(f"counting function of {functional.label} does not grow")
    return ExponentEstimate(
        value=float(fit.slope),
        method="slope-fit",
        functional=functional.label,
        radius=radius,
        window=(float(t0), float(t1)),
        residual=float(fit.stderr),
        levels=levels,
        nonpositive=nonpositive,
    )


def abscissa_of_convergence(
    values: np.ndarray, lengths: np.ndarray, radius: int, iterations: int
) -> tuple[float, float]:
    """Bracket [lo, hi] of the s where the shell sums of exp(-s*values) stop growing.

    The series is called divergent at s when the shell (N-2, N] carries at least
    as much mass as the shell (N-4, N-2].

    Raises:
        WindowTooSmallError: If radius < 4 or a shell is empty
        NumericError: If no sign change is found
    """
    if radius < 4:
        raise WindowTooSmallError(f"poincare-root needs radius >= 4, got {radius}")
    outer = values[(lengths > radius - 2) & (lengths <= radius)]
    inner = values[(lengths > radius - 4) & (lengths <= radius - 2)]
    if outer.size == 0 or inner.size == 0:
        raise WindowTooSmallError("outer spheres are empty")

    def diverges(s: float) -> bool:
        return bool(logsumexp(-s * outer) >= logsumexp(-s * inner))

    if not diverges(0.0):
        raise NumericError("sphere counts do not grow; the series converges at s = 0")
    lo, hi = 0.0, 1.0
    while diverges(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e9:
            raise NumericError("truncated series diverges for every tested s")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if diverges(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * hi:
            break
    return lo, hi


def _poincare_root(
    functional: Functional,
    values: np.ndarray,
    lengths: np.ndarray,
    radius: int,
    nonpositive: int,
    cfg: ExponentSettings,
) -> ExponentEstimate:
    lo, hi = abscissa_of_convergence(values, lengths, radius, cfg.bisection_iterations)
    value = 0.5 * (lo + hi)
    if value <= 0:
        raise NumericError(f"poincare-root of {functional.label} collapsed to zero")
    return ExponentEstimate(
        value=value,
        method="poincare-root",
        functional=functional.label,
        radius=radius,
        residual=hi - lo,
        bracket=(lo, hi),
        levels=4,
        nonpositive=nonpositive,
    )


def critical_exponent(
    functional: Functional,
    paired: PairedSpectra,
    method: ExponentMethod | None = None,
    settings: ExponentSettings | None = None,
) -> ExponentEstimate:
    """Exponential growth rate of #{gamma : phi(a(gamma)) <= t}.

    slope-fit regresses log N(t) on t over [t0, t1] * t_max, where t_max is the
    deepest point of the supporting line mu*n - C below the sphere minima of phi.
    poincare-root bisects on s for the sign change of the shell sums of
    exp(-s*phi) between radii (N-2, N] and (N-4, N-2].

    Raises:
        PositivityError: If phi <= 0 on more than the allowance of elements
        WindowTooSmallError: If the window covers fewer than min_levels spheres
    """
    cfg = settings or get_settings().exponents
    chosen = method or cfg.method
    values, lengths, nonpositive = _positive_values(functional, paired, cfg)
    if chosen == "slope-fit":
        estimate = _slope_fit(functional, values, lengths, paired.radius, nonpositive, cfg)
    else:
        estimate = _poincare_root(functional, values, lengths, paired.radius, nonpositive, cfg)
    logger.debug(
        "critical_exponent_estimated",
        functional=functional.label,
        method=chosen,
        value=estimate.value,
        residual=estimate.residual,
    )
    return estimate


def cross_validate(
    functional: Functional, paired: PairedSpectra, settings: ExponentSettings | None = None
) -> CrossValidation:
    """Slope-fit and poincare-root estimates of the same exponent."""
    result = CrossValidation(
        slope_fit=critical_exponent(functional, paired, "slope-fit", settings),
        poincare_root=critical_exponent(functional, paired, "poincare-root", settings),
    )
    if result.relative_discrepancy > (settings or get_settings().exponents).fit_tolerance:
        logger.warning(
            "estimators_disagree",
            functional=functional.label,
            slope_fit=result.slope_fit.value,
            poincare_root=result.poincare_root.value,
        )
    return result


def hinf_functional(beta: float) -> CombinedFunctional:
    """max{beta * tau, taubar}."""
    if not 0.0 < beta <= 1.0:
        raise InputError(f"beta must lie in (0, 1], got {beta}")
    return CombinedFunctional(kind="max", first=TAU.scaled(beta), second=TAUBAR)


def hinf(
    beta: float, paired: PairedSpectra, method: ExponentMethod | None = None, settings: ExponentSettings | None = None
) -> ExponentEstimate:
    """Critical exponent h_{inf,beta} of max{beta * tau, taubar}."""
    return critical_exponent(hinf_functional(beta), paired, method, settings)


def hmin(
    paired: PairedSpectra, method: ExponentMethod | None = None, settings: ExponentSettings | None = None
) -> ExponentEstimate:
    """Critical exponent of min{tau, taubar}."""
    return critical_exponent(CombinedFunctional(kind="min", first=TAU, second=TAUBAR), paired, method, settings)


def hilbert_entropy(
    spectra: BallSpectra, method: ExponentMethod | None = None, settings: ExponentSettings | None = None
) -> ExponentEstimate:
    """Critical exponent of (tau_1 + tau_2)/2 for a 3-dimensional representation."""
    return critical_exponent(HILBERT, dual_pairing(spectra), method, settings)


# ---------------------------------------------------------------------------
# Critical curve
# ---------------------------------------------------------------------------


def qcurve(
    paired: PairedSpectra,
    angles: list[float] | None = None,
    method: ExponentMethod | None = None,
    settings: ExponentSettings | None = None,
) -> QCurve:
    """Points h_theta * (cos theta, sin theta) on {phi : h_phi = 1}.

    Directions where the estimator fails are skipped with the failure reason.
    Tangents are finite differences in theta.
    """
    cfg = settings or get_settings().exponents
    thetas = angles if angles is not None else list(np.linspace(0.0, math.pi / 2, cfg.qcurve_angles))
    raw: list[tuple[float, ExponentEstimate]] = []
    skipped: list[SkippedDirection] = []
    for theta in sorted(float(t) for t in thetas):
        direction = Functional2D(s=math.cos(theta), u=math.sin(theta))
        try:
            raw.append((theta, critical_exponent(direction, paired, method, cfg)))
        except (HypothesisViolatedError, NumericError) as exc:
            logger.warning("qcurve_direction_skipped", theta=theta, reason=str(exc))
            skipped.append(SkippedDirection(theta=theta, reason=str(exc)))

    coords = np.array([[e.value * math.cos(t), e.value * math.sin(t)] for t, e in raw]).reshape(-1, 2)
    if len(raw) >= 2:
        tangents = np.gradient(coords, np.array([t for t, _ in raw]), axis=0)
    else:
        tangents = np.zeros_like(coords)
    points: list[QCurvePoint] = []
    for (theta, estimate), point, tangent in zip(raw, coords, tangents):
        normal = np.array([tangent[1], -tangent[0]])
        length = float(np.linalg.norm(normal))
        if length > 0:
            normal = normal / length
            if normal @ point < 0:
                normal = -normal
        points.append(
            QCurvePoint(
                theta=theta,
                s=float(point[0]),
                u=float(point[1]),
                h_raw=estimate.value,
                residual=estimate.residual,
                tangent=(float(tangent[0]), float(tangent[1])),
                dual_direction=(float(normal[0]), float(normal[1])),
            )
        )
    logger.info("qcurve_sampled", points=len(points), skipped=len(skipped), radius=paired.radius)
    return QCurve(points=points, skipped=skipped, radius=paired.radius)


def convexity_defect(points: np.ndarray) -> float:
    """Smallest one-sided violation of a consistent turning direction.

    Cross products of consecutive unit edges must share one sign; the result is
    the largest cross product of the minority sign (0 for a convex polygon).
    """
    if len(points) < 3:
        return 0.0
    edges = np.diff(points, axis=0)
    norms = np.linalg.norm(edges, axis=1)
    edges = edges[norms > 0] / norms[norms > 0, None]
    crosses = edges[:-1, 0] * edges[1:, 1] - edges[:-1, 1] * edges[1:, 0]
    if crosses.size == 0:
        return 0.0
    return float(min(max(crosses.max(), 0.0), max((-crosses).max(), 0.0)))


def is_convex(curve: QCurve, tolerance: float = 1e-3) -> bool:
    """Cross-product convexity test with tolerance."""
    return convexity_defect(curve.coordinates()) <= tolerance


def swap_symmetry_defect(curve: QCurve) -> float:
    """max |h(theta) - h(pi/2 - theta)| relative, over sampled angles inside the reflected range."""
    thetas = np.array([p.theta for p in curve.points])
    radii = np.array([p.h_raw for p in curve.points])
    mirrored = math.pi / 2 - thetas
    inside = (mirrored >= thetas.min()) & (mirrored <= thetas.max())
    if not np.any(inside):
        return 0.0
    reflected = np.interp(mirrored[inside], thetas, radii)
    return float(np.max(np.abs(radii[inside] - reflected) / radii[inside]))


def phi_infinity(curve: QCurve, beta: float) -> PhiInfinityResult:
    """Minimizer of ||(s, u)||^{1,beta} = |s|/beta + |u| over a spline through Q.

    The best sampled angle is refined by bounded scalar minimization on its two
    neighbouring intervals. A minimizer within half a step of either end of the
    sampled arc is flagged inconclusive.

    Raises:
        InsufficientCurveError: If fewer than 8 points were sampled
    """
    if not 0.0 < beta <= 1.0:
        raise InputError(f"beta must lie in (0, 1], got {beta}")
    if len(curve.points) < 8:
        raise InsufficientCurveError(f"phi_infinity needs at least 8 Q-curve points, got {len(curve.points)}")
    thetas = np.array([p.theta for p in curve.points])
    radius = CubicSpline(thetas, np.array([p.h_raw for p in curve.points]))

    def norm(theta: float) -> float:
        r = float(radius(theta))
        return r * (abs(math.cos(theta)) / beta + abs(math.sin(theta)))

    sampled = [norm(t) for t in thetas]
    best = int(np.argmin(sampled))
    lo = thetas[max(best - 1, 0)]
    hi = thetas[min(best + 1, len(thetas) - 1)]
    result = minimize_scalar(norm, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    theta = float(result.x) if result.fun <= sampled[best] else float(thetas[best])

    r, dr = float(radius(theta)), float(radius(theta, 1))
    tangent = np.array([dr * math.cos(theta) - r * math.sin(theta), dr * math.sin(theta) + r * math.cos(theta)])
    tangent /= np.linalg.norm(tangent)
    expected = np.array([beta, -1.0]) / math.hypot(beta, 1.0)
    if tangent @ expected < 0:
        tangent = -tangent
    inconclusive = theta - thetas[0] < 0.5 * (thetas[1] - thetas[0]) or thetas[-1] - theta < 0.5 * (
        thetas[-1] - thetas[-2]
    )
    if inconclusive:
        logger.warning("phi_infinity_at_arc_end", beta=beta, theta=theta)
    return PhiInfinityResult(
        beta=beta,
        theta=theta,
        s=r * math.cos(theta),
        u=r * math.sin(theta),
        norm=norm(theta),
        tangent=(float(tangent[0]), float(tangent[1])),
        expected_tangent=(float(expected[0]), float(expected[1])),
        tangent_misalignment=float(abs(tangent[0] * expected[1] - tangent[1] * expected[0])),
        inconclusive=bool(inconclusive),
    )


# ---------------------------------------------------------------------------
# Intersection
# ---------------------------------------------------------------------------


def default_period_cutoff(periods: PairedSpectra) -> float:
    """Smallest tau-period among classes of maximal length."""
    deepest = periods.lengths == periods.lengths.max()
    positive = periods.tau[deepest][periods.tau[deepest] > 0]
    if positive.size == 0:
        raise EmptyPeriodWindowError("no positive period among the longest classes")
    return float(positive.min())


def intersection(periods: PairedSpectra, t: float | None = None) -> IntersectionEstimate:
    """Mean of taubar/tau over classes with 0 < tau <= t.

    Raises:
        EmptyPeriodWindowError: If no class has period in (0, t]
    """
    cutoff = default_period_cutoff(periods) if t is None else t
    window = (periods.tau > 0) & (periods.tau <= cutoff)
    count = int(window.sum())
    if count == 0:
        raise EmptyPeriodWindowError(f"no conjugacy class with period in (0, {cutoff:.6g}]")
    value = float(np.mean(periods.taubar[window] / periods.tau[window]))
    return IntersectionEstimate(value=value, count=count, t=cutoff)


def admissible_beta_bracket(periods: PairedSpectra, t: float | None = None) -> tuple[float, float]:
    """(1 / I_taubar(tau), I_tau(taubar))."""
    forward = intersection(periods, t)
    backward = intersection(periods.swapped(), t)
    return 1.0 / backward.value, forward.value


def periods_from_rows(report_rows: list[IsospectralRow], radius: int) -> PairedSpectra:
    """Paired Jordan periods from isospectrality rows."""
    return PairedSpectra(
        radius=radius,
        lengths=np.array([row.length for row in report_rows], dtype=np.int64),
        tau=np.array([row.tau1_rho for row in report_rows]),
        taubar=np.array([row.tau1_rhobar for row in report_rows]),
        periods=True,
    )


# ---------------------------------------------------------------------------
# Inequality chain
# ---------------------------------------------------------------------------


def _chain(name: str, lhs: float, rhs: float, tolerance: float, relation: str = "<=") -> ChainInequality:
    margin = rhs - lhs
    passed = abs(margin) <= tolerance if relation == "=" else margin >= -tolerance
    return ChainInequality(
        name=name, relation="=" if relation == "=" else "<=", lhs=lhs, rhs=rhs, margin=margin,
        tolerance=tolerance, passed=passed,
    )


def theorem_b_report(
    rho: Representation,
    rhobar: Representation,
    beta: float,
    enumerator: GroupEnumerator,
    radius: int,
    period_radius: int | None = None,
    opposition: bool = False,
    ext_dimension: tuple[float, float] | None = None,
    settings: ExponentSettings | None = None,
) -> TheoremBReport:
    """Entropy chain for (rho, rhobar) with per-inequality margins.

    Args:
        rho: First representation
        rhobar: Second representation on the same presentation
        beta: Exponent in (0, 1]
        enumerator: Enumerator of the shared presentation
        radius: Ball radius for counting
        period_radius: Conjugacy-class length bound (default min(radius, 8))
        opposition: rhobar is the dual of rho, enabling the max/mean identity
        ext_dimension: Optional (estimate, uncertainty) of the dimension of the
            beta-conical set, checked against its bracket
        settings: Exponent settings

    Raises:
        GapIsospectralError: If the pair is gap-isospectral within refusal tolerance
    """
    cfg = settings or get_settings().exponents
    anosov_cfg = get_settings().anosov
    if not 0.0 < beta <= 1.0:
        raise InputError(f"beta must lie in (0, 1], got {beta}")
    classes_radius = period_radius or min(radius, 8)
    iso = gap_isospectral_check(rho, rhobar, classes_radius, enumerator)
    threshold = cfg.isospectral_refusal_factor * anosov_cfg.isospectral_tolerance
    if iso.max_deviation < threshold:
        raise GapIsospectralError(
            f"{rho.name} and {rhobar.name} are gap-isospectral up to length {classes_radius} "
            f"(max deviation {iso.max_deviation:.3g} < {threshold:.3g})",
            iso.max_deviation,
        )

    paired = paired_spectra(rho, rhobar, enumerator, radius)
    estimates = {
        "h_tau": cross_validate(TAU, paired, cfg),
        "h_taubar": cross_validate(TAUBAR, paired, cfg),
        "h_inf": cross_validate(hinf_functional(beta), paired, cfg),
        "h_min": cross_validate(CombinedFunctional(kind="min", first=TAU, second=TAUBAR), paired, cfg),
    }
    q = {key: cv.value for key, cv in estimates.items()}
    err = {key: cv.uncertainty for key, cv in estimates.items()}

    q["beta_h_inf"] = beta * q["h_inf"]
    err["beta_h_inf"] = beta * err["h_inf"]
    q["ext_upper"] = min(q["h_inf"], beta * q["h_inf"] + 1.0 - beta)
    err["ext_upper"] = err["h_inf"]
    q["min_bound"] = min(q["h_taubar"], q["h_tau"] / beta)
    err["min_bound"] = max(err["h_taubar"], err["h_tau"] / beta)
    q["max_bound"] = max(q["h_tau"], q["h_taubar"])
    err["max_bound"] = max(err["h_tau"], err["h_taubar"])

    items = [
        _chain("beta*h_inf <= min{h_inf, beta*h_inf+1-beta}", q["beta_h_inf"], q["ext_upper"],
               err["beta_h_inf"] + err["ext_upper"]),
        _chain("min{h_inf, beta*h_inf+1-beta} <= min{h_taubar, h_tau/beta}", q["ext_upper"], q["min_bound"],
               err["ext_upper"] + err["min_bound"]),
        _chain("h_inf <= min{h_taubar, h_tau/beta}", q["h_inf"], q["min_bound"], err["h_inf"] + err["min_bound"]),
        _chain("min{h_taubar, h_tau/beta} <= max{h_tau, h_taubar}", q["min_bound"], q["max_bound"],
               err["min_bound"] + err["max_bound"]),
        _chain("h_min{tau,taubar} = max{h_tau, h_taubar}", q["h_min"], q["max_bound"],
               err["h_min"] + err["max_bound"], "="),
    ]
    if ext_dimension is not None:
        dim, dim_err = ext_dimension
        q["ext_dimension"] = dim
        err["ext_dimension"] = dim_err
        items.append(_chain("beta*h_inf <= dim(beta-conical)", q["beta_h_inf"], dim, err["beta_h_inf"] + dim_err))
        items.append(_chain("dim(beta-conical) <= min{h_inf, beta*h_inf+1-beta}", dim, q["ext_upper"],
                            dim_err + err["ext_upper"]))
    if opposition:
        mean = cross_validate(HILBERT, paired, cfg)
        hmax = cross_validate(CombinedFunctional(kind="max", first=TAU, second=TAUBAR), paired, cfg)
        q["h_mean"], err["h_mean"] = mean.value, mean.uncertainty
        q["h_max"], err["h_max"] = hmax.value, hmax.uncertainty
        items.append(_chain("h_max{tau,taubar} = h_(tau+taubar)/2", q["h_max"], q["h_mean"],
                            err["h_max"] + err["h_mean"], "="))

    bracket: tuple[float, float] | None = None
    periods = periods_from_rows(iso.rows, classes_radius)
    try:
        bracket = admissible_beta_bracket(periods)
        q["I_tau_taubar"] = bracket[1]
        relative = err["h_tau"] / q["h_tau"] + err["h_taubar"] / q["h_taubar"]
        ratio = q["h_tau"] / q["h_taubar"]
        items.append(_chain("h_tau/h_taubar <= I_tau(taubar)", ratio, bracket[1], relative * ratio))
    except EmptyPeriodWindowError as exc:
        logger.warning("beta_bracket_unavailable", reason=str(exc))

    report = TheoremBReport(
        rho=rho.name,
        rhobar=rhobar.name,
        beta=beta,
        radius=radius,
        quantities=q,
        uncertainties=err,
        inequalities=items,
        isospectral_deviation=iso.max_deviation,
        beta_bracket=bracket,
    )
    logger.info("theorem_b_report", rho=rho.name, rhobar=rhobar.name, beta=beta, passed=report.passed)
    return report
