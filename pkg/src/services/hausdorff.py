"""Fractal-dimension estimation for limit sets and flag curves.

Box counting runs in affine charts of each projective factor, with cubes of
side eps in the concatenated chart coordinates (the L-infinity product metric).
"""

from collections.abc import Sequence

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from src.config.logging import get_logger
from src.config.settings import HausdorffSettings, get_settings
from src.models.boundary import BoundarySample
from src.models.hausdorff import (
    BoxDimensionResult,
    ConicalVerdict,
    CoverDimensionEstimate,
    MetricPointCloud,
    NDiffReport,
    RayProfile,
)
from src.models.representation import Representation
from src.models.spectrum import PairedSpectra
from src.services.anosov import gap_isospectral_check, hyperconvexity_check
from src.services.errors import HypothesisViolatedError, InputError, NumericError
from src.services.exponents import GapIsospectralError, abscissa_of_convergence, hinf, paired_spectra
from src.services.group_core import GroupEnumerator
from src.services.limitset import best_affine_chart, chart_coordinates, flag_samples, nondiff_scan
from src.services.replin import max_generator_step

logger = get_logger(__name__)


class CloudTooSparseError(NumericError):
    """Raised when too few points remain for box counting."""

    code = "cloud-too-sparse"


class InconclusiveEstimateError(NumericError):
    """Raised when an estimator has too little data to return a value."""

    code = "inconclusive"


class NotHyperconvexError(HypothesisViolatedError):
    """Raised when a representation fails the sampled hyperconvexity check."""

    code = "not-hyperconvex"


# ---------------------------------------------------------------------------
# Clouds
# ---------------------------------------------------------------------------


def flag_cloud(samples: Sequence[BoundarySample], which: str = "both") -> MetricPointCloud:
    """Cloud of xi, xibar, or the pairs (xi, xibar)."""
    xi = np.array([s.xi for s in samples])
    xibar = np.array([s.xibar for s in samples])
    if which == "xi":
        return MetricPointCloud(factors=(xi,), metric="projective", label="xi")
    if which == "xibar":
        return MetricPointCloud(factors=(xibar,), metric="projective", label="xibar")
    return MetricPointCloud(factors=(xi, xibar), metric="product-linf", label="flag")


def _coordinates(cloud: MetricPointCloud, normals: Sequence[np.ndarray | None] | None) -> np.ndarray:
    blocks = []
    for i, factor in enumerate(cloud.factors):
        normal = None if normals is None else normals[i]
        if normal is None:
            normal, margin = best_affine_chart(factor)
            logger.debug("affine_chart_chosen", factor=i, margin=margin)
        blocks.append(chart_coordinates(factor, np.asarray(normal, dtype=float)))
    return np.hstack(blocks)


def box_dim(
    cloud: MetricPointCloud,
    eps_range: tuple[float, float] | None = None,
    grid_shifts: int | None = None,
    chart_normals: Sequence[np.ndarray | None] | None = None,
    seed: int = 0,
    settings: HausdorffSettings | None = None,
) -> BoxDimensionResult:
    """-slope of log N(eps) against log eps, averaged over random grid offsets.

    Scales at which the occupied-box count exceeds (1 - saturation_fraction) of
    the point count are trimmed with a warning.

    Raises:
        CloudTooSparseError: If the cloud is below min_points or fewer than 3 scales survive
        InputError: If eps_range spans less than one decade
    """
    cfg = settings or get_settings().hausdorff
    if cloud.size < cfg.min_points:
        raise CloudTooSparseError(f"box counting needs at least {cfg.min_points} points, got {cloud.size}")
    coords = _coordinates(cloud, chart_normals)
    extent = float(np.max(coords.max(axis=0) - coords.min(axis=0)))
    if eps_range is None:
        eps_range = (extent / 400.0, extent / 4.0)
    eps_min, eps_max = eps_range
    if not 0 < eps_min < eps_max or eps_max / eps_min < 10.0 * (1 - 1e-12):
        raise InputError(f"eps range must span at least one decade, got {eps_range}")

    shifts = grid_shifts or cfg.grid_shifts
    rng = np.random.default_rng(seed)
    scales = np.geomspace(eps_max, eps_min, cfg.eps_steps)
    offsets = rng.uniform(0.0, 1.0, size=(shifts, coords.shape[1]))
    counts: list[list[int]] = []
    for eps in scales:
        row = []
        for offset in offsets:
            cells = np.floor(coords / eps + offset).astype(np.int64)
            row.append(int(np.unique(cells, axis=0).shape[0]))
        counts.append(row)
    mean_counts = np.array([np.mean(row) for row in counts])

    saturated = mean_counts > (1.0 - cfg.saturation_fraction) * cloud.size
    trimmed = [float(e) for e in scales[saturated]]
    if trimmed:
        logger.warning("box_range_trimmed", trimmed=len(trimmed), points=cloud.size)
    keep = ~saturated
    if keep.sum() < 3:
        raise CloudTooSparseError(f"only {int(keep.sum())} unsaturated scales for {cloud.size} points")

    log_eps = np.log(scales[keep])
    log_n = np.log(mean_counts[keep])
    fit = stats.linregress(log_eps, log_n)
    local = -np.diff(log_n) / np.diff(log_eps)
    result = BoxDimensionResult(
        dimension=float(-fit.slope),
        stderr=float(fit.stderr),
        eps=[float(e) for e in scales[keep]],
        counts=[counts[i] for i in np.flatnonzero(keep)],
        mean_counts=[float(c) for c in mean_counts[keep]],
        local_slopes=[float(x) for x in local],
        trimmed=trimmed,
        points=cloud.size,
    )
    logger.info("box_dimension_estimated", label=cloud.label, dimension=result.dimension, points=cloud.size)
    return result


# ---------------------------------------------------------------------------
# Conical points
# ---------------------------------------------------------------------------


def ray_profiles(samples: Sequence[BoundarySample]) -> list[RayProfile]:
    """Paired prefix spectra of boundary samples."""
    return [RayProfile(sample_id=s.index, tau=s.tau_profile, taubar=s.taubar_profile) for s in samples]


def conical_points(
    profiles: Sequence[RayProfile],
    beta: float,
    R: float,
    window: tuple[int, int] | None = None,
    min_hits: int | None = None,
    settings: HausdorffSettings | None = None,
) -> list[ConicalVerdict]:
    """Depths k in the window with |beta*tau(a(alpha_k)) - taubar(a(alpha_k))| <= R, per ray."""
    cfg = settings or get_settings().hausdorff
    needed = min_hits or cfg.min_hits
    verdicts: list[ConicalVerdict] = []
    for profile in profiles:
        depth = len(profile.tau)
        start, stop = window or (cfg.window_start, depth)
        tau = np.asarray(profile.tau)
        taubar = np.asarray(profile.taubar)
        depths = range(max(start, 1), min(stop, depth) + 1)
        hits = [k for k in depths if abs(beta * tau[k - 1] - taubar[k - 1]) <= R]
        verdicts.append(
            ConicalVerdict(
                sample_id=profile.sample_id,
                beta=beta,
                R=R,
                window=(start, stop),
                hits=hits,
                min_hits=needed,
                verdict=len(hits) >= needed,
            )
        )
    return verdicts


def default_conical_radius(rho: Representation, rhobar: Representation) -> float:
    """Twice the largest single-generator spectral step of either representation."""
    return 2.0 * max(max_generator_step(rho), max_generator_step(rhobar))


# ---------------------------------------------------------------------------
# Cover sums
# ---------------------------------------------------------------------------


def _cover_exponents(paired: PairedSpectra, beta: float, R: float) -> tuple[np.ndarray, np.ndarray, int]:
    nontrivial = paired.lengths > 0
    tau, taubar = paired.tau[nontrivial], paired.taubar[nontrivial]
    qualifying = np.abs(beta * tau - taubar) <= R
    exponents = np.maximum(beta * tau, taubar)[qualifying]
    return exponents, paired.lengths[nontrivial][qualifying], int(nontrivial.sum())


def cover_shell_sums(paired: PairedSpectra, beta: float, R: float, s: float) -> list[float]:
    """sum of exp(-s*max{beta*tau, taubar}) over qualifying elements of each sphere 1..N."""
    exponents, lengths, _ = _cover_exponents(paired, beta, R)
    sums = []
    for n in range(1, paired.radius + 1):
        shell = exponents[lengths == n]
        sums.append(float(np.exp(logsumexp(-s * shell))) if shell.size else 0.0)
    return sums


def cover_dim_upper(
    paired: PairedSpectra,
    beta: float,
    R: float,
    depth: int | None = None,
    settings: HausdorffSettings | None = None,
) -> CoverDimensionEstimate:
    """Critical s of the cover by balls of radius exp(-max{beta*tau, taubar}).

    Only elements with |beta*tau - taubar| <= R contribute.

    Raises:
        InconclusiveEstimateError: If fewer than min_qualifying elements qualify
    """
    cfg = settings or get_settings().hausdorff
    data = paired.truncated(depth) if depth is not None else paired
    exponents, lengths, total = _cover_exponents(data, beta, R)
    if exponents.size < cfg.min_qualifying:
        raise InconclusiveEstimateError(
            f"only {exponents.size} elements satisfy the gap bound R={R:.3g} (need {cfg.min_qualifying})"
        )
    lo, hi = abscissa_of_convergence(exponents, lengths, data.radius, get_settings().exponents.bisection_iterations)
    value = 0.5 * (lo + hi)
    logger.info("cover_dimension_estimated", beta=beta, R=R, value=value, qualifying=int(exponents.size))
    return CoverDimensionEstimate(
        value=value,
        bracket=(lo, hi),
        beta=beta,
        R=R,
        radius=data.radius,
        qualifying=int(exponents.size),
        total=total,
        shell_sums=cover_shell_sums(data, beta, R, value),
    )


# ---------------------------------------------------------------------------
# Non-differentiability
# ---------------------------------------------------------------------------


def _require_hyperconvex(samples: list[BoundarySample], name: str, seed: int) -> None:
    report = hyperconvexity_check(samples, p=2, seed=seed)
    if not report.verdict:
        raise NotHyperconvexError(
            f"{name} failed the sampled hyperconvexity check (min volume {report.min_volume:.3g})"
        )


def ndiff_verdict(box_dimension: float, hinf1: float, tolerance: float) -> bool:
    """Box dimension and h_{inf,1} agree within tolerance and both lie below 1."""
    return abs(box_dimension - hinf1) <= tolerance and box_dimension < 1.0 and hinf1 < 1.0


def ndiff_dimension(
    rho: Representation,
    rhobar: Representation,
    enumerator: GroupEnumerator,
    sample_budget: int,
    depth: int,
    radius: int = 10,
    seed: int = 0,
    reference: Representation | None = None,
    period_radius: int | None = None,
    settings: HausdorffSettings | None = None,
) -> NDiffReport:
    """Box dimension of the 1-conical part of the flag curve against h_{inf,1}.

    Raises:
        GapIsospectralError: If the pair is gap-isospectral
        NotHyperconvexError: If either representation fails the hyperconvexity check
        CloudTooSparseError: If too few conical samples remain
    """
    cfg = settings or get_settings().hausdorff
    root = get_settings()
    classes_radius = period_radius or min(depth, 8)
    iso = gap_isospectral_check(rho, rhobar, classes_radius, enumerator)
    threshold = root.exponents.isospectral_refusal_factor * root.anosov.isospectral_tolerance
    if iso.max_deviation < threshold:
        raise GapIsospectralError(
            f"{rho.name} and {rhobar.name} are gap-isospectral (max deviation {iso.max_deviation:.3g})",
            iso.max_deviation,
        )

    samples = flag_samples(rho, rhobar, enumerator, sample_budget, depth, seed, reference)
    if rho.dimension >= 3:
        _require_hyperconvex(samples, rho.name, seed)
    if rhobar.dimension >= 3:
        _require_hyperconvex([s.swapped() for s in samples], rhobar.name, seed)

    R = default_conical_radius(rho, rhobar)
    verdicts = conical_points(ray_profiles(samples), 1.0, R, (cfg.window_start, depth), settings=cfg)
    conical = np.array([v.verdict for v in verdicts])
    cloud = flag_cloud(samples).subset(conical)
    box = box_dim(cloud, seed=seed, settings=cfg)
    h = hinf(1.0, paired_spectra(rho, rhobar, enumerator, radius))

    scan = nondiff_scan(samples)
    scan_flags = np.zeros(len(samples), dtype=bool)
    scan_flags[scan.flagged] = True
    overlap = float((scan_flags & conical).sum() / conical.sum()) if conical.any() else 0.0

    difference = abs(box.dimension - h.value)
    report = NDiffReport(
        rho=rho.name,
        rhobar=rhobar.name,
        samples=len(samples),
        flagged=int(conical.sum()),
        conical_fraction=float(conical.mean()),
        R=R,
        box=box,
        hinf1=h,
        difference=difference,
        tolerance=cfg.ndiff_tolerance,
        scan_overlap=overlap,
        isospectral_deviation=iso.max_deviation,
        verdict=ndiff_verdict(box.dimension, h.value, cfg.ndiff_tolerance),
    )
    logger.info("ndiff_dimension", box=box.dimension, hinf1=h.value, flagged=report.flagged, verdict=report.verdict)
    return report
