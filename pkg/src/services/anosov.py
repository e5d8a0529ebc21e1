"""Finite-depth verification of Anosov-type conditions.

Every verdict carries the radius, tolerances and margins it was computed with;
none of them is a proof.
"""

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from src.config.logging import get_logger
from src.config.settings import AnosovSettings, get_settings
from src.models.anosov import (
    DominationFit,
    HyperconvexityReport,
    IsospectralityReport,
    IsospectralRow,
    LimitConeSample,
)
from src.models.boundary import BoundarySample
from src.models.representation import Representation
from src.models.spectrum import BallSpectra
from src.services.errors import InputError, NumericError
from src.services.group_core import GroupEnumerator
from src.services.replin import proj_dist, word_spectra

logger = get_logger(__name__)


class DominationWindowError(NumericError):
    """Raised when no sphere falls inside the domination fit window."""

    code = "empty-window"


def sphere_minima(lengths: np.ndarray, values: np.ndarray, start: int, stop: int) -> tuple[list[int], list[float]]:
    """Minimum of ``values`` on each nonempty sphere with radius in [start, stop]."""
    radii: list[int] = []
    minima: list[float] = []
    for n in range(start, stop + 1):
        mask = lengths == n
        if np.any(mask):
            radii.append(n)
            minima.append(float(values[mask].min()))
    return radii, minima


def supporting_line(radii: list[int], minima: list[float]) -> tuple[float, float]:
    """(mu, C) of the line mu*n - C below every sphere minimum, through the deepest one.

    Raises:
        NumericError: If the linear program fails
    """
    deepest, deepest_min = radii[-1], minima[-1]
    result = linprog(
        c=[1.0, 0.0],
        A_ub=[[float(n), -1.0] for n in radii],
        b_ub=minima,
        A_eq=[[float(deepest), -1.0]],
        b_eq=[deepest_min],
        bounds=[(None, None), (0.0, None)],
        method="highs",
    )
    if not result.success:
        raise NumericError(f"domination linear program failed: {result.message}")
    return float(result.x[0]), max(0.0, float(result.x[1]))


def domination_fit(spectra: BallSpectra, k: int, settings: AnosovSettings | None = None) -> DominationFit:
    """Supporting line mu*n - C under the sphere minima of tau_k(a).

    The line passes through the deepest sphere minimum; mu is the slope of the
    last lower-hull edge, found by a two-variable linear program.

    Args:
        spectra: Ball spectra grouped by word length
        k: Root index, 1 <= k < d
        settings: Thresholds (default: global settings)

    Returns:
        DominationFit with verdict mu >= mu_min

    Raises:
        DominationWindowError: If the fit window holds no sphere
    """
    cfg = settings or get_settings().anosov
    d = spectra.cartan.shape[1]
    if not 1 <= k < d:
        raise InputError(f"root index k must satisfy 1 <= k < {d}, got {k}")

    start = min(cfg.fit_min_radius, spectra.radius)
    radii, minima = sphere_minima(spectra.lengths, spectra.cartan_gap(k), max(start, 1), spectra.radius)
    if not radii:
        raise DominationWindowError(f"no sphere with radius in [{start}, {spectra.radius}]")

    mu, intercept = supporting_line(radii, minima)
    margins = [m - (mu * n - intercept) for n, m in zip(radii, minima)]
    verdict = mu >= cfg.mu_min and min(margins) >= -1e-9

    logger.info("domination_fit", k=k, mu=mu, intercept=intercept, radius=spectra.radius, verdict=verdict)
    return DominationFit(
        k=k,
        mu=mu,
        intercept=intercept,
        min_margin=float(min(margins)),
        radius=spectra.radius,
        window=(radii[0], radii[-1]),
        sphere_minima=minima,
        verdict=verdict,
    )


def _normalized_volume(columns: np.ndarray) -> float:
    gram = columns.T @ columns
    return float(np.sqrt(max(0.0, np.linalg.det(gram))))


def hyperconvexity_check(
    samples: list[BoundarySample],
    p: int,
    triples: int | None = None,
    seed: int = 0,
    settings: AnosovSettings | None = None,
) -> HyperconvexityReport:
    """Minimum normalized volume of (xi(x), xi(y), xi^{d-p}(z)) over sampled triples.

    Triples are stratified by sample-order separation so nearly coincident
    configurations are probed at every dyadic scale.
    """
    cfg = settings or get_settings().anosov
    pool = sorted((s for s in samples if s.converged), key=lambda s: s.order_key)
    if len(pool) < 3:
        raise NumericError(f"hyperconvexity needs at least 3 converged samples, got {len(pool)}")
    d = len(pool[0].xi)
    if not 2 <= p <= d - 1:
        raise InputError(f"p must satisfy 2 <= p <= {d - 1}, got {p}")

    count = triples or cfg.hyperconvex_triples
    rng = np.random.default_rng(seed)
    n = len(pool)
    levels = max(1, int(np.log2(n)))
    best = np.inf
    witness: tuple[int, int, int] | None = None
    evaluated = filtered = 0

    for _ in range(count):
        i = int(rng.integers(n))
        j = (i + max(1, int(2 ** rng.uniform(0, levels)))) % n
        k = (j + max(1, int(2 ** rng.uniform(0, levels)))) % n
        if len({i, j, k}) < 3:
            filtered += 1
            continue
        x, y, z = pool[i], pool[j], pool[k]
        if min(proj_dist(x.xi_vector, y.xi_vector), proj_dist(x.xi_vector, z.xi_vector),
               proj_dist(y.xi_vector, z.xi_vector)) < 1e-12:
            filtered += 1
            continue
        columns = np.column_stack([x.xi_vector, y.xi_vector, z.subspace(d - p)])
        volume = _normalized_volume(columns)
        evaluated += 1
        if volume < best:
            best, witness = volume, (x.index, y.index, z.index)

    if evaluated == 0:
        raise NumericError("every sampled triple was coincident")
    verdict = best > cfg.determinant_floor
    logger.info("hyperconvexity_checked", p=p, triples=evaluated, min_volume=best, verdict=verdict)
    return HyperconvexityReport(
        p=p,
        triples=evaluated,
        filtered=filtered,
        min_volume=float(best),
        witness=witness,
        floor=cfg.determinant_floor,
        verdict=verdict,
    )


def gap_isospectral_check(
    rho: Representation,
    rhobar: Representation,
    n: int,
    enumerator: GroupEnumerator,
    settings: AnosovSettings | None = None,
) -> IsospectralityReport:
    """Max over conjugacy representatives of |tau_1(lambda(rho g)) - tau_1(lambda(rhobar g))|."""
    cfg = settings or get_settings().anosov
    classes = enumerator.conjugacy_reps(n)
    tau = word_spectra(rho, classes).jordan_gap(1)
    taubar = tau if rhobar is rho else word_spectra(rhobar, classes).jordan_gap(1)
    deviation = np.abs(tau - taubar)
    presentation = rho.presentation
    rows = [
        IsospectralRow(
            word=presentation.format_word(w),
            length=len(w),
            tau1_rho=float(tau[i]),
            tau1_rhobar=float(taubar[i]),
            deviation=float(deviation[i]),
        )
        for i, w in enumerate(classes)
    ]
    top = int(np.argmax(deviation)) if len(classes) else -1
    max_dev = float(deviation[top]) if top >= 0 else 0.0
    report = IsospectralityReport(
        radius=n,
        max_deviation=max_dev,
        witness=rows[top].word if top >= 0 and max_dev > 0 else None,
        tolerance=cfg.isospectral_tolerance,
        isospectral=max_dev < cfg.isospectral_tolerance,
        rows=rows,
    )
    logger.info("gap_isospectral_checked", radius=n, classes=len(classes), max_deviation=max_dev)
    return report


def limit_cone(spectra: BallSpectra, settings: AnosovSettings | None = None) -> LimitConeSample:
    """Projectivized Jordan projections with their hull in gap coordinates."""
    cfg = settings or get_settings().anosov
    jordan = spectra.jordan
    norms = np.linalg.norm(jordan, axis=1)
    keep = norms > cfg.degenerate_lambda
    points = jordan[keep] / norms[keep, None]
    gaps = points[:, :-1] - points[:, 1:]

    area = 0.0
    aperture = 0.0
    if gaps.shape[0] and gaps.shape[1] >= 2:
        plane = gaps[:, :2]
        angles = np.arctan2(plane[:, 1], plane[:, 0])
        aperture = float(angles.max() - angles.min())
        try:
            area = float(ConvexHull(np.vstack([plane, np.zeros(2)])).volume)
        except (QhullError, ValueError):
            area = 0.0
    return LimitConeSample(
        points=[tuple(float(x) for x in row) for row in points],
        gap_points=[tuple(float(x) for x in row) for row in gaps],
        hull_area=area,
        aperture=aperture,
        discarded=int((~keep).sum()),
    )


def local_conformal_check(spectra: BallSpectra, p: int) -> float:
    """max |a_2 - a_p| over the ball (0 when p = 2)."""
    if p == 2:
        return 0.0
    return float(np.max(np.abs(spectra.cartan[:, 1] - spectra.cartan[:, p - 1])))


def symmetric_spectra_check(spectra: BallSpectra) -> float:
    """max |tau_1(a) - tau_2(a)| over the ball; 0 on the Sym2 Fuchsian locus."""
    if spectra.cartan.shape[1] < 3:
        return 0.0
    return float(np.max(np.abs(spectra.cartan_gap(1) - spectra.cartan_gap(2))))


def verdict_summary(
    name: str,
    fits: list[DominationFit],
    hyperconvexity: HyperconvexityReport | None = None,
    isospectrality: IsospectralityReport | None = None,
    cone: LimitConeSample | None = None,
    conformal: float | None = None,
    symmetric: float | None = None,
) -> str:
    """One-page plain-text report of all checks."""
    lines = [f"verification report for {name}", ""]
    for fit in fits:
        lines.append(
            f"domination k={fit.k}: mu={fit.mu:.6g} C={fit.intercept:.6g} margin={fit.min_margin:.3g} "
            f"window={fit.window[0]}..{fit.window[1]} radius={fit.radius} -> {'PASS' if fit.verdict else 'FAIL'}"
        )
    if hyperconvexity is not None:
        lines.append(
            f"hyperconvexity p={hyperconvexity.p}: min volume={hyperconvexity.min_volume:.3g} "
            f"over {hyperconvexity.triples} triples (floor {hyperconvexity.floor:.1g}) -> "
            f"{'PASS' if hyperconvexity.verdict else 'FAIL'} ({hyperconvexity.caveat})"
        )
    if isospectrality is not None:
        lines.append(
            f"gap isospectrality radius={isospectrality.radius}: max deviation={isospectrality.max_deviation:.3g} "
            f"witness={isospectrality.witness or '-'} -> "
            f"{'ISOSPECTRAL' if isospectrality.isospectral else 'not isospectral'}"
        )
    if cone is not None:
        lines.append(
            f"limit cone: {len(cone.points)} classes, hull area={cone.hull_area:.3g}, aperture={cone.aperture:.3g}"
        )
    if conformal is not None:
        lines.append(f"local conformality: max |a2 - ap| = {conformal:.3g}")
    if symmetric is not None:
        lines.append(f"symmetric spectra: max |tau1 - tau2| = {symmetric:.3g}")
    lines += ["", "all verdicts are finite-depth checks, not proofs"]
    return "\n".join(lines) + "\n"
