"""Limit maps, flag-curve samples and boundary diagnostics.

Boundary points are approximated by Cartan attractors of deep prefixes of
geodesic rays. Samples are cyclically ordered through a reference Fuchsian
representation when the presentation has one.
"""

import math

import numpy as np
from scipy import stats

from src.config.logging import get_logger
from src.config.settings import LimitSetSettings, get_settings
from src.models.boundary import (
    BoundarySample,
    ConcavityProfile,
    ConeImageStat,
    NondiffScan,
    TransversalityProfile,
    XiEstimate,
)
from src.models.group import Ray, Word
from src.models.representation import BallProducts, Representation
from src.services.errors import InputError, NumericError
from src.services.group_core import GroupEnumerator
from src.services.replin import (
    AmbiguousAttractorError,
    cartan_attractor,
    evaluate,
    gromov_product,
    prefix_products,
    proj_dist,
    spectra_of,
)

logger = get_logger(__name__)


class ReferenceOrdering:
    """Cyclic-order keys for boundary points.

    Uses the angle on RP^1 for 2-dimensional references, the polar angle in the
    best affine chart for 3-dimensional references, and a lexicographic key
    on ray letters when there is no reference.
    """

    def __init__(self, reference: Representation | None, rank: int):
        self.reference = reference
        self.rank = rank
        self._normal: np.ndarray | None = None
        self._basis: np.ndarray | None = None
        self._centre: np.ndarray | None = None

    def _line(self, letters: Word) -> np.ndarray:
        assert self.reference is not None
        return cartan_attractor(evaluate(self.reference, letters))

    def prepare(self, rays: list[Ray]) -> None:
        """Fix the affine chart for 3-dimensional references."""
        if self.reference is None or self.reference.dimension != 3:
            return
        points = np.array([self._line(r.letters) for r in rays])
        normal, _ = best_affine_chart(points)
        self._normal = normal
        self._basis = _complement_basis(normal)
        coords = _chart(points, normal, self._basis)
        self._centre = coords.mean(axis=0)

    def key(self, ray: Ray) -> float:
        """Order key of the boundary point of a ray."""
        if self.reference is None:
            return sum((s + 1) / (self.rank + 1) ** (i + 1) for i, s in enumerate(ray.letters))
        line = self._line(ray.letters)
        if self.reference.dimension == 2:
            return (2.0 * math.atan2(line[1], line[0])) % (2 * math.pi)
        if self._normal is None or self._basis is None or self._centre is None:
            raise NumericError("ReferenceOrdering.prepare must run before keys are requested")
        coords = _chart(line[None], self._normal, self._basis)[0] - self._centre
        return math.atan2(coords[1], coords[0]) % (2 * math.pi)


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------


def _complement_basis(normal: np.ndarray) -> np.ndarray:
    """Rows spanning the orthogonal complement of ``normal``."""
    _, _, vt = np.linalg.svd(normal[None, :])
    return vt[1:]


def _chart(points: np.ndarray, normal: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return (points @ basis.T) / (points @ normal)[:, None]


def best_affine_chart(points: np.ndarray) -> tuple[np.ndarray, float]:
    """Chart normal n maximizing min |p . n| over unit points p.

    Candidates are the top singular direction of the point matrix and the mean
    of the sign-aligned points.

    Returns:
        (normal, margin)
    """
    units = points / np.linalg.norm(points, axis=1)[:, None]
    _, _, vt = np.linalg.svd(units, full_matrices=False)
    top = vt[0]
    aligned = units * np.where(units @ top < 0, -1.0, 1.0)[:, None]
    mean = aligned.mean(axis=0)
    candidates = [top, mean / np.linalg.norm(mean)] if np.linalg.norm(mean) > 0 else [top]
    margins = [float(np.min(np.abs(units @ c))) for c in candidates]
    best = int(np.argmax(margins))
    return candidates[best], margins[best]


def chart_coordinates(points: np.ndarray, normal: np.ndarray | None = None) -> np.ndarray:
    """Affine coordinates of projective points in the chart with the given (or best) normal."""
    if normal is None:
        normal, _ = best_affine_chart(points)
    return _chart(points, normal, _complement_basis(normal))


def conic_fit_residual(points: np.ndarray) -> float:
    """Smallest singular value of the conic design matrix in the best chart (0 on a conic)."""
    coords = chart_coordinates(points)
    x, y = coords[:, 0], coords[:, 1]
    design = np.column_stack([x * x, x * y, y * y, x, y, np.ones_like(x)])
    design = design / np.linalg.norm(design, axis=0)
    return float(np.linalg.svd(design, compute_uv=False)[-1])


# ---------------------------------------------------------------------------
# Limit points
# ---------------------------------------------------------------------------


def _attractors(products: BallProducts) -> tuple[np.ndarray, np.ndarray]:
    """Top left-singular vectors and tau_1 gaps for a batch of products."""
    u, s, _ = np.linalg.svd(products.matrices)
    with np.errstate(divide="ignore"):
        gaps = np.log(s[:, 0]) - np.log(s[:, 1])
    return u[:, :, 0], gaps


def _decay_rate(directions: np.ndarray, gaps: np.ndarray, tolerance: float) -> float | None:
    depths: list[int] = []
    logs: list[float] = []
    for n in range(2, directions.shape[0]):
        if gaps[n] < tolerance or gaps[n - 1] < tolerance:
            continue
        dist = proj_dist(directions[n - 1], directions[n])
        if dist > 1e-14:
            depths.append(n)
            logs.append(math.log(dist))
    if len(depths) < 3:
        return None
    return float(stats.linregress(depths, logs).slope)


def xi(
    ray: Ray,
    representation: Representation,
    depth: int | None = None,
    fit_decay: bool = False,
    tolerance: float | None = None,
) -> XiEstimate:
    """U1(rho(alpha_n)) with convergence d(U1(alpha_{n-1}), U1(alpha_n)).

    Raises:
        AmbiguousAttractorError: If the top singular gap at depth n is below tolerance
    """
    n = depth or ray.depth
    if not 1 <= n <= ray.depth:
        raise InputError(f"depth must satisfy 1 <= depth <= {ray.depth}, got {n}")
    products = prefix_products(representation, ray.prefix(n))
    point = cartan_attractor(products.element(n), tolerance)
    previous = products.element(n - 1)
    try:
        convergence = proj_dist(cartan_attractor(previous, tolerance), point) if n > 1 else 1.0
    except AmbiguousAttractorError:
        convergence = 1.0
    rate = None
    if fit_decay:
        directions, gaps = _attractors(products)
        gap_floor = tolerance if tolerance is not None else get_settings().numerics.gap_tolerance
        rate = _decay_rate(directions, gaps, gap_floor)
    return XiEstimate(point=tuple(float(x) for x in point), depth=n, convergence=convergence, decay_rate=rate)


def _boundary_data(products: BallProducts, tolerance: float) -> dict:
    n = products.radius
    point_el = products.element(n)
    point = cartan_attractor(point_el, tolerance)
    try:
        convergence = proj_dist(cartan_attractor(products.element(n - 1), tolerance), point) if n > 1 else 1.0
    except AmbiguousAttractorError:
        convergence = 1.0
    dual = products.dual_element(n)
    if dual is None:
        raise NumericError("prefix products must track the dual")
    hyperplane = cartan_attractor(dual, tolerance)
    frame = np.linalg.svd(point_el.matrix)[0]
    if frame[:, 0] @ point < 0:
        frame[:, 0] = -frame[:, 0]
    profile = spectra_of(products).cartan
    taus = profile[1:, 0] - profile[1:, 1]
    return {
        "point": point,
        "hyperplane": hyperplane,
        "frame": frame,
        "convergence": convergence,
        "taus": taus,
    }


def flag_samples(
    rho: Representation,
    rhobar: Representation,
    enumerator: GroupEnumerator,
    count: int,
    depth: int,
    seed: int,
    reference: Representation | None = None,
    settings: LimitSetSettings | None = None,
) -> list[BoundarySample]:
    """Boundary samples carrying both limit maps, sorted by cyclic-order key.

    Unconverged samples are kept with ``converged=False``.
    """
    cfg = settings or get_settings().limitset
    gap_tolerance = get_settings().numerics.gap_tolerance
    if rho.presentation.content_hash() != rhobar.presentation.content_hash():
        raise InputError("rho and rhobar must share the presentation")
    rays = enumerator.geodesic_rays(depth, count, seed)
    ordering = ReferenceOrdering(reference, rho.presentation.rank)
    ordering.prepare(rays)

    samples: list[BoundarySample] = []
    for index, ray in enumerate(rays):
        data = _boundary_data(prefix_products(rho, ray.letters), gap_tolerance)
        data_bar = _boundary_data(prefix_products(rhobar, ray.letters), gap_tolerance)
        converged = max(data["convergence"], data_bar["convergence"]) < cfg.convergence_tolerance
        samples.append(
            BoundarySample(
                index=index,
                ray=ray,
                xi=tuple(float(x) for x in data["point"]),
                xibar=tuple(float(x) for x in data_bar["point"]),
                xi_hyperplane=tuple(float(x) for x in data["hyperplane"]),
                xibar_hyperplane=tuple(float(x) for x in data_bar["hyperplane"]),
                xi_frame=tuple(tuple(float(x) for x in row) for row in data["frame"]),
                xibar_frame=tuple(tuple(float(x) for x in row) for row in data_bar["frame"]),
                convergence=float(data["convergence"]),
                convergence_bar=float(data_bar["convergence"]),
                order_key=float(ordering.key(ray)),
                converged=converged,
                tau_profile=tuple(float(x) for x in data["taus"]),
                taubar_profile=tuple(float(x) for x in data_bar["taus"]),
            )
        )
    unconverged = sum(1 for s in samples if not s.converged)
    if unconverged:
        logger.warning("unconverged_samples", count=unconverged, total=len(samples), depth=depth)
    logger.info("flag_samples_generated", count=len(samples), depth=depth, seed=seed)
    return sorted(samples, key=lambda s: s.order_key)


def max_adjacent_gap(samples: list[BoundarySample]) -> float:
    """Largest d(xi_i, xi_{i+1}) between cyclically adjacent samples."""
    ordered = sorted(samples, key=lambda s: s.order_key)
    return max(
        proj_dist(ordered[i].xi_vector, ordered[(i + 1) % len(ordered)].xi_vector) for i in range(len(ordered))
    )


# ---------------------------------------------------------------------------
# Cone images
# ---------------------------------------------------------------------------


def _diameter(points: np.ndarray) -> float:
    """Largest pairwise projective distance among unit vectors."""
    cosines = np.clip(np.abs(points @ points.T), 0.0, 1.0)
    return float(np.sqrt(max(0.0, 1.0 - float(cosines.min()) ** 2)))


def cone_image_stats(
    rho: Representation,
    ray: Ray,
    samples: list[BoundarySample],
    window: tuple[int, int],
    enumerator: GroupEnumerator,
    settings: LimitSetSettings | None = None,
) -> list[ConeImageStat]:
    """Diameter of xi(alpha_n C(alpha_n)) for prefixes alpha_n of a ray.

    A sample with truncated ray beta lies in the cone of alpha_n when
    |NF(alpha_n^-1 beta)| <= |beta| - n + c.
    """
    cfg = settings or get_settings().limitset
    solver = enumerator.solver
    presentation = rho.presentation
    start, stop = window
    products = prefix_products(rho, ray.prefix(min(stop, ray.depth)))
    spectra = spectra_of(products)
    taus = spectra.cartan_gap(1)

    stats_out: list[ConeImageStat] = []
    for n in range(start, min(stop, ray.depth) + 1):
        alpha = ray.prefix(n)
        alpha_inverse = presentation.inverse_word(alpha)
        members: list[np.ndarray] = []
        for sample in samples:
            beta = sample.ray.prefix(n + cfg.cone_extra_depth)
            length = solver.word_length(alpha_inverse + beta)
            if length <= len(beta) - n + cfg.coarse_constant:
                members.append(sample.xi_vector)
        tau1 = float(taus[n])
        label = presentation.format_word(alpha)
        if len(members) < 2:
            logger.debug("cone_skipped", prefix=label, members=len(members))
            stats_out.append(
                ConeImageStat(prefix=label, depth=n, tau1=tau1, members=len(members), skipped="fewer than 2 members")
            )
            continue
        diameter = _diameter(np.array(members))
        stats_out.append(
            ConeImageStat(
                prefix=label,
                depth=n,
                tau1=tau1,
                members=len(members),
                diameter=diameter,
                ratio=diameter * math.exp(tau1),
            )
        )
    return stats_out


# ---------------------------------------------------------------------------
# Non-differentiability and regularity profiles
# ---------------------------------------------------------------------------


def _slope(x: np.ndarray, y: np.ndarray, i: int, j: int) -> float | None:
    dx = x[j] - x[i]
    dy = y[j] - y[i]
    if dx == 0.0 or dy == 0.0:
        return None
    return abs(dy / dx)


def secant_scan(x: np.ndarray, y: np.ndarray, threshold: float) -> NondiffScan:
    """Two-scale secant test on a monotone graph sampled at (x_i, y_i).

    Point i is scored by max |log(s_near / s_far)| over the sides that have 4
    neighbours, with s_near the secant slope to the adjacent point and s_far the
    slope to the point 4 apart.
    """
    n = len(x)
    scores: list[float | None] = []
    flagged: list[int] = []
    insufficient: list[int] = []
    for i in range(n):
        values: list[float] = []
        for step in (1, -1):
            far = i + 4 * step
            if not 0 <= far < n:
                continue
            near_slope = _slope(x, y, i, i + step)
            far_slope = _slope(x, y, i, far)
            if near_slope is not None and far_slope is not None:
                values.append(abs(math.log(near_slope / far_slope)))
        if not values:
            scores.append(None)
            insufficient.append(i)
            continue
        score = max(values)
        scores.append(score)
        if score > threshold:
            flagged.append(i)
    return NondiffScan(threshold=threshold, scores=scores, flagged=flagged, insufficient=insufficient)


def arc_lengths(points: np.ndarray) -> np.ndarray:
    """Cumulative projective arc length along an ordered list of unit vectors."""
    steps = [0.0] + [proj_dist(points[i - 1], points[i]) for i in range(1, len(points))]
    return np.cumsum(steps)


def nondiff_scan(samples: list[BoundarySample], threshold: float | None = None) -> NondiffScan:
    """secant_scan on the graph (xi arc length, xibar arc length) of sorted samples."""
    cut = threshold if threshold is not None else get_settings().limitset.angle_threshold
    ordered = sorted(samples, key=lambda s: s.order_key)
    x = arc_lengths(np.array([s.xi for s in ordered]))
    y = arc_lengths(np.array([s.xibar for s in ordered]))
    result = secant_scan(x, y, cut)
    logger.info("nondiff_scanned", samples=len(ordered), flagged=len(result.flagged), threshold=cut)
    return result


def concavity_profile(samples: list[BoundarySample], beta: float, levels: int = 5) -> ConcavityProfile:
    """d(xibar x, xibar y) / d(xi x, xi y)^beta for neighbours 1, 2, 4, ... apart."""
    ordered = [s for s in sorted(samples, key=lambda s: s.order_key) if s.converged]
    scales: list[int] = []
    lower: list[float] = []
    upper: list[float] = []
    median: list[float] = []
    for level in range(levels):
        step = 2**level
        quotients = []
        for i in range(len(ordered) - step):
            a, b = ordered[i], ordered[i + step]
            base = proj_dist(a.xi_vector, b.xi_vector)
            if base > 0:
                quotients.append(proj_dist(a.xibar_vector, b.xibar_vector) / base**beta)
        if not quotients:
            break
        scales.append(step)
        lower.append(float(np.min(quotients)))
        upper.append(float(np.max(quotients)))
        median.append(float(np.median(quotients)))
    return ConcavityProfile(beta=beta, scales=scales, lower=lower, upper=upper, median=median)


def transversality_profile(
    samples: list[BoundarySample], separation: float | None = None, floor: float | None = None
) -> TransversalityProfile:
    """min Gr(xi^{d-1}(x), xi(y)) over pairs whose normalized order keys differ by more than ``separation``."""
    delta = separation if separation is not None else get_settings().limitset.transversality_separation
    limit = floor if floor is not None else get_settings().numerics.gromov_floor
    pool = [s for s in samples if s.converged]
    keys = np.array([s.order_key for s in pool])
    span = float(keys.max() - keys.min()) if len(pool) > 1 else 1.0
    normalized = (keys - keys.min()) / (span or 1.0)
    best = 0.0
    witness: tuple[int, int] | None = None
    pairs = 0
    for i, x in enumerate(pool):
        for j, y in enumerate(pool):
            if i == j:
                continue
            gap = abs(normalized[i] - normalized[j])
            if min(gap, 1.0 - gap) <= delta:
                continue
            pairs += 1
            value = gromov_product(np.asarray(x.xi_hyperplane), y.xi_vector, limit)
            if value < best or witness is None:
                best, witness = value, (x.index, y.index)
    return TransversalityProfile(separation=delta, pairs=pairs, min_gromov=best, witness=witness, floor=limit)


def equivariance_defect(
    rho: Representation, sample: BoundarySample, gamma: Word, enumerator: GroupEnumerator
) -> float:
    """d(xi(gamma x), rho(gamma) xi(x)) with gamma x given by the normal form of gamma beta."""
    word = enumerator.solver.normal_form(gamma + sample.ray.letters)
    if not word:
        raise NumericError("translated ray collapsed to the identity")
    moved = cartan_attractor(evaluate(rho, word))
    image = rho.product(gamma) @ sample.xi_vector
    return proj_dist(moved, image)
