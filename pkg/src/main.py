"""Command-line entry point for anosov-lab.

Usage:
    python -m src.main <command> [options]

Commands:
    ball          enumerate a ball (and its spectra when --rep is given)
    verify        domination, hyperconvexity, limit cone and isospectrality checks
    limitset      boundary samples of the flag curves with cone statistics
    flagcurve     SVG of the limit curve with non-differentiability flags
    qcurve        critical curve in span{tau, taubar} and the minimizing functional
    entropy       critical exponent of one functional
    intersection  period-ratio intersection and the admissible beta bracket
    conical       beta-conical verdicts and the cover-dimension upper estimate
    hdim          box-counting dimension of a point cloud or of the conical flag set
    theoremB      entropy chain report for a non-isospectral pair

Every command writes its artifacts to --output; failures write error.csv there
and exit with the error's code.
"""

import argparse
import hashlib
import math
import sys
from collections.abc import Callable
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src.config.logging import configure_logging, get_logger
from src.config.settings import ExponentSettings, Settings, get_settings, set_settings
from src.models.boundary import BoundarySample
from src.models.exponents import Functional, Functional2D
from src.models.group import BallEnumeration, Presentation
from src.models.hausdorff import BoxDimensionResult
from src.models.representation import Representation
from src.models.run_config import EXPONENT_COMMANDS, RunConfig
from src.models.spectrum import BallSpectra, PairedSpectra
from src.persistence.db import Database
from src.persistence.repositories.enumeration_cache import EnumerationCacheRepository
from src.services import anosov, exponents, hausdorff, limitset
from src.services.catalog import ExampleCatalog
from src.services.emitters import SvgPlot, read_cloud, write_csv, write_error_csv, write_text
from src.services.errors import EXIT_OK, InputError, LabError, NumericError
from src.services.group_core import GroupEnumerator, build_solver
from src.services.replin import BallEvaluator, dual_rep, validate_relations

logger = get_logger(__name__)


class LabRun:
    """Resolved inputs of one invocation: presentation, representations, enumerator and cache."""

    def __init__(self, config: RunConfig, settings: Settings, catalog: ExampleCatalog | None = None):
        """Resolve every reference of ``config``.

        Raises:
            InputError: If a reference cannot be resolved or rho and rhobar disagree on the presentation
        """
        self.config = config
        self.settings = settings
        self.catalog = catalog or ExampleCatalog()
        self.rho: Representation | None = None
        self.rhobar: Representation | None = None
        self.cache: EnumerationCacheRepository | None = None
        self._db: Database | None = None

        presentation: Presentation | None = None
        if config.rep is not None:
            self.rho = self.catalog.representation(config.rep)
            validate_relations(self.rho)
            presentation = self.rho.presentation
            if config.repbar is None or config.repbar == "dual":
                self.rhobar = dual_rep(self.rho)
            else:
                self.rhobar = self.catalog.representation(config.repbar)
                validate_relations(self.rhobar)
                if self.rhobar.presentation.content_hash() != presentation.content_hash():
                    raise InputError(f"{self.rho.name} and {self.rhobar.name} use different presentations")
        if config.presentation is not None:
            given = self.catalog.presentation(config.presentation)
            if presentation is not None and given.content_hash() != presentation.content_hash():
                raise InputError(f"--presentation does not match the presentation of {config.rep}")
            presentation = presentation or given
        self.presentation = presentation
        self.enumerator: GroupEnumerator | None = None
        if presentation is not None:
            _, self.enumerator = build_solver(presentation)

    def __enter__(self) -> "LabRun":
        if self.settings.cache.enabled and self.presentation is not None:
            self._db = Database(self.settings.cache.database)
            self._db.connect()
            self.cache = EnumerationCacheRepository(self._db, self.settings.cache.directory)
        return self

    def __exit__(self, *exc: object) -> None:
        if self._db is not None:
            self._db.disconnect()
            self._db = None
            self.cache = None

    @property
    def pair(self) -> tuple[Representation, Representation]:
        """(rho, rhobar); rhobar defaults to the dual of rho."""
        if self.rho is None or self.rhobar is None:
            raise InputError(f"{self.config.command} needs --rep")
        return self.rho, self.rhobar

    @property
    def group(self) -> GroupEnumerator:
        """Enumerator of the resolved presentation."""
        if self.enumerator is None:
            raise InputError(f"{self.config.command} needs --presentation or --rep")
        return self.enumerator

    def input_hash(self) -> str:
        """sha256 over the content hashes of every input."""
        digest = hashlib.sha256()
        for part in (self.presentation, self.rho, self.rhobar):
            if part is not None:
                digest.update(part.content_hash().encode())
        if self.config.cloud is not None:
            digest.update(self.config.cloud.read_bytes())
        return digest.hexdigest()

    def metadata(self, **extra: object) -> dict[str, object]:
        """Header written at the top of every artifact."""
        meta: dict[str, object] = {
            "command": self.config.command,
            "seed": self.config.seed,
            "depth": self.config.depth,
            "rep": self.rho.name if self.rho else "",
            "repbar": self.rhobar.name if self.rhobar else "",
            "gap_tolerance": self.settings.numerics.gap_tolerance,
            "convergence_tolerance": self.settings.limitset.convergence_tolerance,
            "isospectral_tolerance": self.settings.anosov.isospectral_tolerance,
            "input_hash": self.input_hash(),
        }
        meta.update(extra)
        return meta

    def spectra(self, representation: Representation, radius: int) -> tuple[BallEnumeration, BallSpectra]:
        """Ball of ``radius`` with the spectra of ``representation``, through the cache when enabled."""
        p_hash = representation.presentation.content_hash()
        r_hash = representation.content_hash()
        if self.cache is not None:
            cached = self.cache.get(p_hash, r_hash, radius)
            if cached is not None:
                return cached.ball, cached.spectra
        ball = self.group.ball(radius)
        spectra = BallEvaluator(representation).spectra(ball)
        if self.cache is not None:
            self.cache.put(p_hash, r_hash, ball, spectra)
        return ball, spectra

    def paired(self, radius: int) -> PairedSpectra:
        """tau_1 of rho and of rhobar over ball(radius)."""
        rho, rhobar = self.pair
        ball, spectra = self.spectra(rho, radius)
        _, spectra_bar = self.spectra(rhobar, radius)
        return PairedSpectra(
            radius=radius, lengths=ball.lengths, tau=spectra.cartan_gap(1), taubar=spectra_bar.cartan_gap(1)
        )

    def reference(self) -> Representation | None:
        """Reference Fuchsian representation used for cyclic order keys."""
        return self.catalog.reference(self.presentation) if self.presentation is not None else None

    def output(self, name: str) -> Path:
        """Artifact path inside the output directory."""
        return self.config.output_dir / name


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _vector_header(prefix: str, d: int) -> list[str]:
    return [f"{prefix}_{i}" for i in range(d)]


def run_ball(run: LabRun) -> list[Path]:
    """Normal forms of ball(depth), with Cartan and Jordan vectors when a representation is given."""
    depth = run.config.depth
    if run.rho is None:
        ball = run.group.ball(depth)
        presentation = run.group.solver.presentation
        rows = ([i, presentation.format_word(w), len(w), int(ball.parents[i])] for i, w in enumerate(ball.words))
        path = write_csv(
            run.output("ball.csv"), ["index", "word", "length", "parent"], rows, run.metadata(elements=ball.size)
        )
        return [path]
    ball, spectra = run.spectra(run.rho, depth)
    d = run.rho.dimension
    presentation = run.rho.presentation
    rows = (
        [i, presentation.format_word(w), len(w), *spectra.cartan[i], *spectra.jordan[i]]
        for i, w in enumerate(ball.words)
    )
    header = ["index", "word", "length", *_vector_header("a", d), *_vector_header("lambda", d)]
    return [write_csv(run.output("ball.csv"), header, rows, run.metadata(elements=ball.size))]


def run_verify(run: LabRun) -> list[Path]:
    """Domination fits, limit cone, conformality, hyperconvexity and, for an explicit rhobar, isospectrality."""
    rho, rhobar = run.pair
    config = run.config
    d = rho.dimension
    _, spectra = run.spectra(rho, config.depth)
    fits = [anosov.domination_fit(spectra, k) for k in range(1, d)]
    meta = run.metadata()
    paths = [
        write_csv(
            run.output("domination.csv"),
            ["k", "mu", "C", "min_margin", "window_start", "window_stop", "radius", "verdict"],
            ([f.k, f.mu, f.intercept, f.min_margin, f.window[0], f.window[1], f.radius, f.verdict] for f in fits),
            meta,
        )
    ]
    cone = conformal = hyper = iso = None
    if d >= 3:
        cone = anosov.limit_cone(spectra)
        conformal = anosov.local_conformal_check(spectra, d - 1)
        samples = limitset.flag_samples(
            rho, rho, run.group, config.samples, config.depth, config.seed, run.reference()
        )
        hyper = anosov.hyperconvexity_check(samples, p=2, seed=config.seed)
    if config.repbar is not None:
        iso = anosov.gap_isospectral_check(rho, rhobar, config.depth, run.group)
        paths.append(
            write_csv(
                run.output("isospectral.csv"),
                ["class", "len", "tau1_rho", "tau1_rhobar", "deviation"],
                ([r.word, r.length, r.tau1_rho, r.tau1_rhobar, r.deviation] for r in iso.rows),
                meta,
            )
        )
    summary = anosov.verdict_summary(
        rho.name,
        fits,
        hyperconvexity=hyper,
        isospectrality=iso,
        cone=cone,
        conformal=conformal,
        symmetric=anosov.symmetric_spectra_check(spectra),
    )
    paths.append(write_text(run.output("verify.txt"), summary, meta))
    return paths


def _samples(run: LabRun) -> list[BoundarySample]:
    rho, rhobar = run.pair
    config = run.config
    return limitset.flag_samples(rho, rhobar, run.group, config.samples, config.depth, config.seed, run.reference())


def run_limitset(run: LabRun) -> list[Path]:
    """Boundary samples, cone image statistics and a regularity summary."""
    rho, rhobar = run.pair
    config = run.config
    samples = _samples(run)
    scan = limitset.nondiff_scan(samples)
    flagged = set(scan.flagged)
    meta = run.metadata(samples=len(samples))
    header = [
        "order_key",
        "ray_prefix",
        *_vector_header("xi", rho.dimension),
        *_vector_header("xibar", rhobar.dimension),
        "convergence",
        "convergence_bar",
        "converged",
        "flagged",
    ]
    rows = (
        [
            s.order_key,
            rho.presentation.format_word(s.ray.prefix(min(8, s.ray.depth))),
            *s.xi,
            *s.xibar,
            s.convergence,
            s.convergence_bar,
            s.converged,
            position in flagged,
        ]
        for position, s in enumerate(samples)
    )
    paths = [write_csv(run.output("limitset.csv"), header, rows, meta)]

    window = config.depth_window or (1, config.depth)
    anchor = next((s for s in samples if s.converged), samples[0])
    cones = limitset.cone_image_stats(rho, anchor.ray, samples, window, run.group)
    paths.append(
        write_csv(
            run.output("cones.csv"),
            ["prefix", "depth", "tau1", "members", "diameter", "ratio", "skipped"],
            ([c.prefix, c.depth, c.tau1, c.members, c.diameter, c.ratio, c.skipped or ""] for c in cones),
            meta,
        )
    )

    transversality = limitset.transversality_profile(samples)
    concavity = limitset.concavity_profile(samples, config.beta)
    defect = limitset.equivariance_defect(rho, anchor, (0,), run.group)
    lines = [
        f"samples: {len(samples)} ({sum(1 for s in samples if not s.converged)} unconverged)",
        f"max adjacent gap: {limitset.max_adjacent_gap(samples):.6g}",
        f"non-differentiability scan: {len(scan.flagged)} flagged at threshold {scan.threshold:g}",
        f"transversality: min Gromov product {transversality.min_gromov:.6g} over {transversality.pairs} pairs",
        f"concavity beta={concavity.beta:g}: "
        + ", ".join(f"scale {s}: [{lo:.3g}, {hi:.3g}]" for s, lo, hi in
                    zip(concavity.scales, concavity.lower, concavity.upper)),
        f"equivariance defect (first generator): {defect:.3g}",
    ]
    paths.append(write_text(run.output("limitset.txt"), "\n".join(lines) + "\n", meta))
    return paths


def run_flagcurve(run: LabRun) -> list[Path]:
    """SVG of the xi curve in its best affine chart (or the arc-length graph for d = 2) with flags."""
    rho, _ = run.pair
    samples = _samples(run)
    scan = limitset.nondiff_scan(samples)
    meta = run.metadata(samples=len(samples), threshold=scan.threshold)
    if rho.dimension >= 3:
        xy = limitset.chart_coordinates(np.array([s.xi for s in samples]))[:, :2]
        title = f"xi curve of {rho.name}"
    else:
        x = limitset.arc_lengths(np.array([s.xi for s in samples]))
        y = limitset.arc_lengths(np.array([s.xibar for s in samples]))
        xy = np.column_stack([x, y])
        title = f"arc-length graph of {rho.name}"
    plot = SvgPlot(title=title)
    plot.polyline(xy)
    if scan.flagged:
        plot.points(xy[scan.flagged], radius=2.5, color="#c0392b")
    paths = [plot.save(run.output("flagcurve.svg"), meta)]
    rows = ([i, s.order_key, scan.scores[i], i in set(scan.flagged)] for i, s in enumerate(samples))
    paths.append(write_csv(run.output("flagcurve.csv"), ["position", "order_key", "score", "flagged"], rows, meta))
    return paths


def run_qcurve(run: LabRun) -> list[Path]:
    """Critical curve samples, convexity and symmetry diagnostics and the minimizing functional."""
    config = run.config
    paired = run.paired(config.depth)
    angles = None
    if config.angles is not None:
        angles = [float(t) for t in np.linspace(0.0, math.pi / 2, config.angles)]
    curve = exponents.qcurve(paired, angles, config.method)
    meta = run.metadata(beta=config.beta, method=config.method or run.settings.exponents.method)
    rows = (
        [p.theta, p.s, p.u, p.h_raw, 1.0, p.tangent[0], p.tangent[1]] for p in curve.points
    )
    paths = [
        write_csv(
            run.output("qcurve.csv"), ["theta", "s", "u", "h_raw", "h_scaled", "tangent_s", "tangent_u"], rows, meta
        )
    ]
    lines = [
        f"points: {len(curve.points)} (skipped {len(curve.skipped)})",
        *(f"skipped theta={d.theta:.6g}: {d.reason}" for d in curve.skipped),
        f"convexity defect: {exponents.convexity_defect(curve.coordinates()):.3g}",
        f"convex: {exponents.is_convex(curve)}",
        f"swap symmetry defect: {exponents.swap_symmetry_defect(curve):.3g}",
    ]
    phi = exponents.phi_infinity(curve, config.beta)
    lines += [
        f"phi_inf beta={phi.beta:g}: theta={phi.theta:.6g} s={phi.s:.6g} u={phi.u:.6g} norm={phi.norm:.6g}",
        f"tangent misalignment: {phi.tangent_misalignment:.3g}" + (" (inconclusive)" if phi.inconclusive else ""),
    ]
    paths.append(write_text(run.output("qcurve.txt"), "\n".join(lines) + "\n", meta))
    plot = SvgPlot(title="critical curve Q")
    coords = curve.coordinates()
    plot.polyline(coords)
    plot.points(coords, radius=2.0)
    plot.points(np.array([[phi.s, phi.u]]), radius=3.5, color="#c0392b")
    paths.append(plot.save(run.output("qcurve.svg"), meta))
    return paths


def _entropy_input(run: LabRun) -> tuple[Functional, PairedSpectra]:
    rho, _ = run.pair
    phi = run.config.phi.strip().lower()
    if phi in ("tau1", "tau2"):
        k = int(phi[-1])
        if k >= rho.dimension:
            raise InputError(f"{phi} needs dimension > {k}, got {rho.dimension}")
        ball, spectra = run.spectra(rho, run.config.depth)
        gap = spectra.cartan_gap(k)
        return exponents.TAU, PairedSpectra(radius=run.config.depth, lengths=ball.lengths, tau=gap, taubar=gap)
    if phi == "hilbert":
        _, spectra = run.spectra(rho, run.config.depth)
        return exponents.HILBERT, exponents.dual_pairing(spectra)
    try:
        s, u = (float(x) for x in phi.split(","))
        functional = Functional2D(s=s, u=u)
    except ValueError as exc:
        raise InputError(f"--phi must be tau1, tau2, hilbert or 's,u', got '{run.config.phi}'") from exc
    return functional, run.paired(run.config.depth)


def run_entropy(run: LabRun) -> list[Path]:
    """Critical exponent of --phi by the chosen method, with the other estimator alongside when it succeeds."""
    functional, paired = _entropy_input(run)
    chosen = run.config.method or run.settings.exponents.method
    primary = exponents.critical_exponent(functional, paired, chosen)
    other_method = "poincare-root" if chosen == "slope-fit" else "slope-fit"
    estimates = [primary]
    try:
        estimates.append(exponents.critical_exponent(functional, paired, other_method))
    except LabError as exc:
        logger.warning("secondary_estimator_failed", method=other_method, reason=str(exc))
    rows = (
        [
            e.functional,
            e.method,
            e.value,
            e.residual,
            e.levels,
            e.window[0] if e.window else "",
            e.window[1] if e.window else "",
            e.bracket[0] if e.bracket else "",
            e.bracket[1] if e.bracket else "",
            e.radius,
            e.nonpositive,
        ]
        for e in estimates
    )
    header = [
        "functional", "method", "value", "residual", "levels", "window_start", "window_stop",
        "bracket_lo", "bracket_hi", "radius", "nonpositive",
    ]
    path = write_csv(run.output("entropy.csv"), header, rows, run.metadata(phi=functional.label, method=chosen))
    print(f"{functional.label} {primary.method} {primary.value:.6g}")
    return [path]


def run_intersection(run: LabRun) -> list[Path]:
    """Period table over conjugacy classes, intersection and admissible beta bracket."""
    rho, rhobar = run.pair
    config = run.config
    iso = anosov.gap_isospectral_check(rho, rhobar, config.depth, run.group)
    periods = exponents.periods_from_rows(iso.rows, config.depth)
    forward = exponents.intersection(periods, config.t)
    backward = exponents.intersection(periods.swapped(), config.t)
    bracket = exponents.admissible_beta_bracket(periods, config.t)
    meta = run.metadata(t=forward.t)
    paths = [
        write_csv(
            run.output("periods.csv"),
            ["class", "len", "tau1_rho", "tau1_rhobar", "deviation"],
            ([r.word, r.length, r.tau1_rho, r.tau1_rhobar, r.deviation] for r in iso.rows),
            meta,
        ),
        write_csv(
            run.output("intersection.csv"),
            ["quantity", "value", "count", "t"],
            [
                ["I_tau(taubar)", forward.value, forward.count, forward.t],
                ["I_taubar(tau)", backward.value, backward.count, backward.t],
                ["beta_lower", bracket[0], "", forward.t],
                ["beta_upper", bracket[1], "", forward.t],
            ],
            meta,
        ),
    ]
    return paths


def _conical_window(run: LabRun) -> tuple[int, int]:
    depth = run.config.depth
    return run.config.depth_window or (min(run.settings.hausdorff.window_start, depth // 2), depth)


def run_conical(run: LabRun) -> list[Path]:
    """beta-conical verdicts per sample and the truncated cover estimate."""
    rho, rhobar = run.pair
    config = run.config
    samples = _samples(run)
    R = config.R or hausdorff.default_conical_radius(rho, rhobar)
    window = _conical_window(run)
    verdicts = hausdorff.conical_points(hausdorff.ray_profiles(samples), config.beta, R, window)
    by_id = {s.index: s for s in samples}
    meta = run.metadata(beta=config.beta, R=R, window=f"{window[0]}-{window[1]}")
    rows = (
        [v.sample_id, by_id[v.sample_id].order_key, len(v.hits), ";".join(str(k) for k in v.hits), v.verdict]
        for v in verdicts
    )
    paths = [write_csv(run.output("conical.csv"), ["sample", "order_key", "hits", "depths", "conical"], rows, meta)]
    lines = [f"conical: {sum(v.verdict for v in verdicts)} of {len(verdicts)} samples"]
    try:
        cover = hausdorff.cover_dim_upper(run.paired(config.depth), config.beta, R)
        lines.append(
            f"cover dimension upper estimate: {cover.value:.6g} in [{cover.bracket[0]:.6g}, {cover.bracket[1]:.6g}] "
            f"from {cover.qualifying} of {cover.total} elements"
        )
        lines.append("shell sums: " + " ".join(f"{x:.3g}" for x in cover.shell_sums))
    except hausdorff.InconclusiveEstimateError as exc:
        lines.append(f"cover dimension upper estimate: inconclusive ({exc})")
    paths.append(write_text(run.output("conical.txt"), "\n".join(lines) + "\n", meta))
    return paths


def _box_outputs(run: LabRun, box: BoxDimensionResult, meta: dict[str, object]) -> list[Path]:
    rows = ([eps, count, shift] for eps, counts in zip(box.eps, box.counts) for shift, count in enumerate(counts))
    paths = [write_csv(run.output("hdim.csv"), ["eps", "N_eps", "shift_id"], rows, meta)]
    plot = SvgPlot(title="log N(eps) against log eps")
    loglog = np.column_stack([np.log(box.eps), np.log(box.mean_counts)])
    plot.polyline(loglog)
    plot.points(loglog, radius=2.5)
    paths.append(plot.save(run.output("hdim.svg"), meta))
    return paths


def run_hdim(run: LabRun) -> list[Path]:
    """Box dimension of a cloud file, or of the 1-conical flag set compared with h_inf(1)."""
    config = run.config
    if config.cloud is not None:
        cloud = read_cloud(config.cloud)
        box = hausdorff.box_dim(cloud, seed=config.seed)
        meta = run.metadata(points=box.points)
        paths = _box_outputs(run, box, meta)
        text = (
            f"box dimension: {box.dimension:.6g} +- {box.stderr:.3g} over {len(box.eps)} scales\n"
            + (f"trimmed saturated scales: {', '.join(f'{e:.3g}' for e in box.trimmed)}\n" if box.trimmed else "")
        )
        paths.append(write_text(run.output("hdim.txt"), text, meta))
        print(f"box_dim {box.dimension:.6g}")
        return paths
    rho, rhobar = run.pair
    report = hausdorff.ndiff_dimension(
        rho, rhobar, run.group, config.samples, config.depth, radius=config.depth, seed=config.seed,
        reference=run.reference(),
    )
    meta = run.metadata(points=report.box.points, R=report.R)
    paths = _box_outputs(run, report.box, meta)
    text = "\n".join(
        [
            f"samples: {report.samples}, 1-conical: {report.flagged} ({report.conical_fraction:.3g})",
            f"box dimension: {report.box.dimension:.6g} +- {report.box.stderr:.3g}",
            f"h_inf(1): {report.hinf1.value:.6g}",
            f"difference: {report.difference:.3g} (tolerance {report.tolerance:g}) -> "
            f"{'CONSISTENT' if report.verdict else 'INCONSISTENT'}",
            f"overlap with secant-scan flags: {report.scan_overlap:.3g}",
            f"isospectral deviation: {report.isospectral_deviation:.3g}",
        ]
    )
    paths.append(write_text(run.output("hdim.txt"), text + "\n", meta))
    return paths


def run_theorem_b(run: LabRun) -> list[Path]:
    """Entropy chain with margins for (rho, rhobar)."""
    rho, rhobar = run.pair
    config = run.config
    report = exponents.theorem_b_report(
        rho, rhobar, config.beta, run.group, config.depth, opposition=config.repbar in (None, "dual")
    )
    meta = run.metadata(beta=config.beta)
    paths = [
        write_csv(
            run.output("theoremB.csv"),
            ["inequality", "relation", "lhs", "rhs", "margin", "tolerance", "passed"],
            ([i.name, i.relation, i.lhs, i.rhs, i.margin, i.tolerance, i.passed] for i in report.inequalities),
            meta,
        )
    ]
    lines = [f"{rho.name} vs {rhobar.name}, beta={report.beta:g}, radius={report.radius}", ""]
    lines += [f"{k} = {v:.6g} +- {report.uncertainties.get(k, 0.0):.3g}" for k, v in report.quantities.items()]
    if report.beta_bracket is not None:
        lines.append(f"admissible beta bracket: [{report.beta_bracket[0]:.6g}, {report.beta_bracket[1]:.6g}]")
    lines += ["", *(f"{'PASS' if i.passed else 'FAIL'} {i.name} (margin {i.margin:.3g})" for i in report.inequalities)]
    lines += ["", report.caveat]
    paths.append(write_text(run.output("theoremB.txt"), "\n".join(lines) + "\n", meta))
    return paths


COMMANDS: dict[str, Callable[[LabRun], list[Path]]] = {
    "ball": run_ball,
    "verify": run_verify,
    "limitset": run_limitset,
    "flagcurve": run_flagcurve,
    "qcurve": run_qcurve,
    "entropy": run_entropy,
    "intersection": run_intersection,
    "conical": run_conical,
    "hdim": run_hdim,
    "theoremB": run_theorem_b,
}


def run(config: RunConfig, settings: Settings | None = None) -> list[Path]:
    """Execute one command and return the written artifacts.

    Raises:
        LabError: Typed failures of the services
        NumericError: For linear algebra and floating point failures escaping them
    """
    active = settings or get_settings()
    if config.window is not None and config.command in EXPONENT_COMMANDS:
        counting = ExponentSettings.model_validate({**active.exponents.model_dump(), "window": config.window})
        active = active.model_copy(update={"exponents": counting})
        set_settings(active)
    logger.info("command_started", command=config.command, depth=config.depth, seed=config.seed)
    try:
        with LabRun(config, active) as lab:
            paths = COMMANDS[config.command](lab)
    except (np.linalg.LinAlgError, FloatingPointError, OverflowError, ZeroDivisionError, ValueError) as exc:
        # Inputs are validated by now, so these come from the numerics.
        raise NumericError(f"{config.command} failed numerically: {type(exc).__name__}: {exc}") from exc
    logger.info("command_finished", command=config.command, artifacts=[str(p) for p in paths])
    return paths


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _window(text: str) -> tuple[float, float]:
    try:
        start, stop = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"window must be 'start,stop', got '{text}'") from exc
    return start, stop


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per command and shared options."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--presentation", help="Presentation name, file, or inline one-line form")
    common.add_argument("--rep", help="Catalog name or representation file for rho")
    common.add_argument("--repbar", help="Catalog name, file, or 'dual' (default) for rhobar")
    common.add_argument("--depth", type=int, default=8, help="Enumeration depth N (>= 4)")
    common.add_argument("--samples", type=int, default=256, help="Boundary sample count")
    common.add_argument("--beta", type=float, default=1.0, help="Exponent beta in (0, 1]")
    common.add_argument("--R", dest="R", type=float, help="Conical gap bound")
    common.add_argument(
        "--window", type=_window, help="t0,t1 fractions of t_max for qcurve, entropy and theoremB; depths elsewhere",
    )
    common.add_argument("--method", choices=["slope-fit", "poincare-root"])
    common.add_argument("--phi", default="tau1", help="tau1, tau2, hilbert, or 's,u'")
    common.add_argument("--angles", type=int, help="Number of Q-curve directions")
    common.add_argument("--t", dest="t", type=float, help="Period cutoff for the intersection")
    common.add_argument("--cloud", type=Path, help="Point-cloud CSV for hdim")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", type=Path, help="Output directory (default from settings)")
    common.add_argument("--config", type=Path, help="Settings YAML file")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])

    parser = argparse.ArgumentParser(prog="anosov-lab", description="Spectral, entropy and dimension laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in COMMANDS.items():
        summary = (handler.__doc__ or "").splitlines()[0]
        sub.add_parser(name, parents=[common], help=summary, description=summary)
    return parser


def main(argv: list[str] | None = None) -> int:
    """Parse arguments, run the command and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    settings: Settings | None = None
    output_dir = args.output or Path("output")
    try:
        try:
            settings = Settings.load_from_yaml(args.config) if args.config else get_settings()
        except (FileNotFoundError, ValidationError) as exc:
            raise InputError(f"invalid configuration: {exc}") from exc
        set_settings(settings)
        configure_logging(
            level=args.log_level or settings.logging.level,
            log_format=settings.logging.format,
            log_dir=settings.logging.directory,
            rotation_days=settings.logging.rotation_days,
            max_size_mb=settings.logging.max_size_mb,
        )
        output_dir = args.output or settings.output.directory
        try:
            config = RunConfig(
                command=args.command,
                presentation=args.presentation,
                rep=args.rep,
                repbar=args.repbar,
                depth=args.depth,
                samples=args.samples,
                beta=args.beta,
                R=args.R,
                window=args.window,
                method=args.method,
                phi=args.phi,
                angles=args.angles,
                t=args.t,
                cloud=args.cloud,
                seed=args.seed,
                output_dir=output_dir,
            )
        except ValidationError as exc:
            raise InputError(f"invalid arguments: {exc}") from exc
        run(config, settings)
    except LabError as exc:
        path = write_error_csv(output_dir, exc)
        logger.error(
            "command_failed", command=args.command, code=exc.code, exit_code=exc.exit_code, error=str(exc),
            error_csv=str(path),
        )
        return exc.exit_code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
