"""Representation evaluation and matrix spectral geometry.

Long products are kept as unit-Frobenius matrices with the divided-out scale
accumulated in log form. Cartan and Jordan projections are read off those
matrices with the smallest entry completed from the accumulated determinant
(and pinned by the dual product when one is tracked), so tiny singular values
do not lose their relative accuracy.
"""

import math
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import stats

from src.config.logging import get_logger
from src.config.settings import NumericsSettings, get_settings
from src.models.group import BallEnumeration, Presentation, Word
from src.models.representation import BallProducts, NormalizedMatrix, Representation
from src.models.spectrum import BallSpectra, SpectrumSample
from src.services.errors import InputError, NumericError

logger = get_logger(__name__)


class RepresentationParseError(InputError):
    """Raised when a representation file is malformed or inconsistent."""

    code = "representation-parse"


class RelationDefectError(InputError):
    """Raised when a relator does not evaluate to +-Id within tolerance."""

    code = "relation-defect"


class NumericOverflowError(NumericError):
    """Raised when a product produces non-finite entries.

    Attributes:
        word: Word whose evaluation overflowed
    """

    code = "numeric-overflow"

    def __init__(self, message: str, word: Word = ()):
        super().__init__(message)
        self.word = word


class AmbiguousAttractorError(NumericError):
    """Raised when the singular value gap is too small to pick a direction.

    Attributes:
        gap: The offending root gap
    """

    code = "ambiguous-attractor"

    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap


# ---------------------------------------------------------------------------
# Parsing and construction
# ---------------------------------------------------------------------------


def parse_representation(
    text: str,
    name: str,
    presentation: Presentation | None = None,
    resolve_presentation: Callable[[str], Presentation] | None = None,
) -> Representation:
    """Parse a representation file.

    Grammar: ``dim d``, ``field R``, optional ``presentation <ref>``, then one
    line per generator ``name m11 m12 ... mdd`` (row-major). Matrices of
    generators not listed are computed as inverses of their formal inverse.

    Args:
        text: File contents
        name: Name for the representation
        presentation: Presentation to use, overriding any ``presentation`` line
        resolve_presentation: Resolves a ``presentation`` reference to a Presentation

    Returns:
        Validated Representation

    Raises:
        RepresentationParseError: On grammar errors, missing generators or bad matrices
    """
    dim: int | None = None
    reference: str | None = None
    rows: dict[str, list[float]] = {}

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        key = head.lower()
        if key == "dim":
            try:
                dim = int(rest[0])
            except (IndexError, ValueError) as e:
                raise RepresentationParseError(f"invalid dim line: '{line}'") from e
        elif key == "field":
            if rest != ["R"]:
                raise RepresentationParseError(f"only field R is supported, got '{' '.join(rest)}'")
        elif key == "presentation":
            reference = " ".join(rest)
        else:
            try:
                rows[head] = [float(x) for x in rest]
            except ValueError as e:
                raise RepresentationParseError(f"non-numeric matrix entry on line '{line}'") from e

    if dim is None or dim < 1:
        raise RepresentationParseError("representation file needs a 'dim d' line")
    if presentation is None:
        if reference is None:
            raise RepresentationParseError("no presentation given and no 'presentation' line")
        if resolve_presentation is None:
            raise RepresentationParseError(f"cannot resolve presentation reference '{reference}'")
        presentation = resolve_presentation(reference)

    matrices: list[np.ndarray | None] = [None] * presentation.rank
    for gen, values in rows.items():
        try:
            index = presentation.letter(gen)
        except KeyError as e:
            raise RepresentationParseError(str(e)) from e
        if len(values) != dim * dim:
            raise RepresentationParseError(f"generator {gen} needs {dim * dim} entries, got {len(values)}")
        matrices[index] = np.array(values, dtype=float).reshape(dim, dim)

    for index, matrix in enumerate(matrices):
        if matrix is not None:
            continue
        source = matrices[presentation.inverses[index]]
        if source is None:
            raise RepresentationParseError(f"no matrix for generator {presentation.generators[index]}")
        try:
            matrices[index] = np.linalg.inv(source)
        except np.linalg.LinAlgError as e:
            raise RepresentationParseError(f"matrix of {presentation.generators[index]} is singular") from e

    try:
        return Representation(
            name=name, presentation=presentation, matrices=tuple(m for m in matrices if m is not None)
        )
    except ValueError as e:
        raise RepresentationParseError(str(e)) from e


def check_relations(representation: Representation) -> float:
    """Largest entrywise distance of a relation word's image from +-Id."""
    d = representation.dimension
    eye = np.eye(d)
    defect = 0.0
    for word in representation.presentation.relation_words():
        m = representation.product(word)
        defect = max(defect, min(float(np.max(np.abs(m - eye))), float(np.max(np.abs(m + eye)))))
    return defect


def validate_relations(representation: Representation, tolerance: float | None = None) -> float:
    """check_relations that raises when the defect exceeds the tolerance.

    Raises:
        RelationDefectError: If some relator is not +-Id within tolerance
    """
    limit = tolerance if tolerance is not None else get_settings().numerics.relation_tolerance
    defect = check_relations(representation)
    if defect > limit:
        raise RelationDefectError(
            f"representation {representation.name} violates a relator (defect {defect:.3g} > {limit:.3g})"
        )
    return defect


def dual_rep(representation: Representation) -> Representation:
    """Contragredient representation: s acts by the transpose of rho(s^-1)."""
    inverses = representation.presentation.inverses
    matrices = tuple(np.ascontiguousarray(representation.matrices[inverses[i]].T) for i in range(len(inverses)))
    return Representation(
        name=f"{representation.name}-dual",
        presentation=representation.presentation,
        matrices=matrices,
    )


def sym2_matrix(m: np.ndarray) -> np.ndarray:
    """Action of a 2x2 matrix on symmetric tensors in the basis (x^2, sqrt2 xy, y^2)."""
    a, b = m[0]
    c, d = m[1]
    r = math.sqrt(2.0)
    return np.array(
        [
            [a * a, r * a * b, b * b],
            [r * a * c, a * d + b * c, r * b * d],
            [c * c, r * c * d, d * d],
        ]
    )


def sym2_lift(representation: Representation) -> Representation:
    """Symmetric square of a 2-dimensional representation.

    The sqrt2 scaling of the middle monomial makes Sym2(SO(2)) orthogonal, so
    Fuchsian lifts have exactly symmetric Cartan spectra.
    """
    if representation.dimension != 2:
        raise InputError(f"sym2_lift needs a 2-dimensional representation, got d={representation.dimension}")
    matrices = []
    for m in representation.matrices:
        det = float(np.linalg.det(m))
        lifted = sym2_matrix(m)
        if det < 0:
            lifted = -lifted
        matrices.append(lifted)
    return Representation(
        name=f"sym2({representation.name})",
        presentation=representation.presentation,
        matrices=tuple(matrices),
    )


# ---------------------------------------------------------------------------
# Products
# ---------------------------------------------------------------------------


def _identity(d: int) -> tuple[np.ndarray, float]:
    return np.eye(d) / math.sqrt(d), 0.5 * math.log(d)


def evaluate(
    representation: Representation, word: Word, settings: NumericsSettings | None = None
) -> NormalizedMatrix:
    """Normalized product of generator matrices along a word.

    The empty word maps to Id/sqrt(d) with log_scale log sqrt(d).

    Raises:
        NumericOverflowError: If the product leaves the finite range
    """
    cfg = settings or get_settings().numerics
    if cfg.extended_precision and len(word) > cfg.extended_length_threshold:
        return evaluate_extended(representation, word, cfg.extended_precision_bits)

    matrix, log_scale = _identity(representation.dimension)
    log_det = 0.0
    for s in word:
        matrix = matrix @ representation.matrices[s]
        norm = float(np.linalg.norm(matrix))
        if not math.isfinite(norm) or norm == 0.0:
            raise NumericOverflowError(
                f"product overflowed on word {representation.presentation.format_word(word)}", word
            )
        matrix = matrix / norm
        log_scale += math.log(norm)
        log_det += float(representation.log_abs_det[s])
    return NormalizedMatrix(matrix=matrix, log_scale=log_scale, log_det=log_det)


def evaluate_extended(representation: Representation, word: Word, bits: int) -> NormalizedMatrix:
    """evaluate() carried out in mpmath at the given mantissa size."""
    d = representation.dimension
    with mpmath.workprec(bits):
        generators = [mpmath.matrix(m.tolist()) for m in representation.matrices]
        matrix = mpmath.eye(d) / mpmath.sqrt(d)
        log_scale = mpmath.log(mpmath.sqrt(d))
        for s in word:
            matrix = matrix * generators[s]
            norm = mpmath.mnorm(matrix, "f")
            if norm == 0 or not mpmath.isfinite(norm):
                raise NumericOverflowError(
                    f"extended product degenerated on word {representation.presentation.format_word(word)}", word
                )
            matrix = matrix / norm
            log_scale += mpmath.log(norm)
        stored = np.array([[float(matrix[i, j]) for j in range(d)] for i in range(d)])
        log_det = float(sum(representation.log_abs_det[s] for s in word))
        return NormalizedMatrix(matrix=stored, log_scale=float(log_scale), log_det=log_det)


def prefix_products(representation: Representation, letters: Word) -> BallProducts:
    """Normalized products of every prefix of a word (row n is the length-n prefix)."""
    n = len(letters)
    d = representation.dimension
    dual = dual_rep(representation)
    matrices = np.empty((n + 1, d, d))
    dual_matrices = np.empty((n + 1, d, d))
    log_scale = np.empty(n + 1)
    dual_log_scale = np.empty(n + 1)
    log_det = np.zeros(n + 1)
    matrices[0], log_scale[0] = _identity(d)
    dual_matrices[0], dual_log_scale[0] = _identity(d)
    for i, s in enumerate(letters, start=1):
        for store, scales, gens in (
            (matrices, log_scale, representation.matrices),
            (dual_matrices, dual_log_scale, dual.matrices),
        ):
            product = store[i - 1] @ gens[s]
            norm = float(np.linalg.norm(product))
            if not math.isfinite(norm) or norm == 0.0:
                raise NumericOverflowError(
                    f"product overflowed on prefix {representation.presentation.format_word(letters[:i])}",
                    letters[:i],
                )
            store[i] = product / norm
            scales[i] = scales[i - 1] + math.log(norm)
        log_det[i] = log_det[i - 1] + representation.log_abs_det[s]
    return BallProducts(
        radius=n,
        lengths=np.arange(n + 1),
        matrices=matrices,
        log_scale=log_scale,
        log_det=log_det,
        dual_matrices=dual_matrices,
        dual_log_scale=dual_log_scale,
    )


class BallEvaluator:
    """Batched evaluation of a representation over an enumerated ball.

    Each sphere is computed from the previous one with a single batched matrix
    product along the prefix tree, so every element costs one product.
    """

    def __init__(self, representation: Representation, track_dual: bool | None = None):
        self.representation = representation
        self.track_dual = representation.dimension >= 3 if track_dual is None else track_dual
        self._dual = dual_rep(representation) if self.track_dual else None

    def _propagate(self, ball: BallEnumeration, generators: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = generators.shape[1]
        matrices = np.empty((ball.size, d, d))
        log_scale = np.empty(ball.size)
        matrices[0], log_scale[0] = _identity(d)
        for n in range(1, ball.radius + 1):
            rows = ball.sphere_slice(n)
            parents = ball.parents[rows]
            product = matrices[parents] @ generators[ball.letters[rows]]
            norms = np.linalg.norm(product, axis=(1, 2))
            bad = ~np.isfinite(norms) | (norms == 0.0)
            if np.any(bad):
                index = rows.start + int(np.flatnonzero(bad)[0])
                word = ball.words[index]
                raise NumericOverflowError(
                    f"product overflowed on word {self.representation.presentation.format_word(word)}", word
                )
            matrices[rows] = product / norms[:, None, None]
            log_scale[rows] = log_scale[parents] + np.log(norms)
        return matrices, log_scale

    def products(self, ball: BallEnumeration) -> BallProducts:
        """Normalized products for every element of the ball."""
        matrices, log_scale = self._propagate(ball, self.representation.stack)
        log_det = np.zeros(ball.size)
        for n in range(1, ball.radius + 1):
            rows = ball.sphere_slice(n)
            log_det[rows] = log_det[ball.parents[rows]] + self.representation.log_abs_det[ball.letters[rows]]
        dual_matrices = dual_log_scale = None
        if self._dual is not None:
            dual_matrices, dual_log_scale = self._propagate(ball, self._dual.stack)
        logger.debug("ball_evaluated", representation=self.representation.name, size=ball.size)
        return BallProducts(
            radius=ball.radius,
            lengths=ball.lengths,
            matrices=matrices,
            log_scale=log_scale,
            log_det=log_det,
            dual_matrices=dual_matrices,
            dual_log_scale=dual_log_scale,
        )

    def spectra(self, ball: BallEnumeration) -> BallSpectra:
        """Cartan and Jordan projections for every element of the ball."""
        return spectra_of(self.products(ball))


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------


def _singular_values(matrices: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.svd(matrices, compute_uv=False)
    except np.linalg.LinAlgError:
        logger.warning("svd_not_converged_fallback_eigh", count=int(matrices.shape[0]))
    try:
        gram = np.swapaxes(matrices, -1, -2) @ matrices
        values = np.linalg.eigvalsh(gram)[..., ::-1]
        return np.sqrt(np.clip(values, 0.0, None))
    except np.linalg.LinAlgError as e:
        raise NumericError("singular value computation did not converge") from e


def _complete(logs: np.ndarray, log_det: np.ndarray, pinned_last: np.ndarray | None) -> np.ndarray:
    """Replace unreliable bottom entries using log|det| (and a dual pin), recentre, sort."""
    d = logs.shape[1]
    values = logs.copy()
    if d > 1:
        if pinned_last is None:
            values[:, -1] = log_det - values[:, :-1].sum(axis=1)
        else:
            values[:, -1] = pinned_last
            values[:, -2] = log_det - values[:, :-2].sum(axis=1) - pinned_last
    values -= (log_det / d)[:, None]
    return -np.sort(-values, axis=1)


def cartan_vectors(
    matrices: np.ndarray,
    log_scale: np.ndarray,
    log_det: np.ndarray,
    dual_matrices: np.ndarray | None = None,
    dual_log_scale: np.ndarray | None = None,
) -> np.ndarray:
    """Batched Cartan projections a(g), rows sorted descending and summing to 0."""
    with np.errstate(divide="ignore"):
        logs = np.log(_singular_values(matrices)) + log_scale[:, None]
        pinned = None
        if dual_matrices is not None and dual_log_scale is not None:
            pinned = -(np.log(_singular_values(dual_matrices)[:, 0]) + dual_log_scale)
    return _complete(logs, log_det, pinned)


def jordan_vectors(
    matrices: np.ndarray,
    log_scale: np.ndarray,
    log_det: np.ndarray,
    dual_matrices: np.ndarray | None = None,
    dual_log_scale: np.ndarray | None = None,
) -> np.ndarray:
    """Batched Jordan projections lambda(g), rows sorted descending and summing to 0."""
    try:
        moduli = -np.sort(-np.abs(np.linalg.eigvals(matrices)), axis=1)
        dual_top = None
        if dual_matrices is not None:
            dual_top = np.max(np.abs(np.linalg.eigvals(dual_matrices)), axis=1)
    except np.linalg.LinAlgError as e:
        raise NumericError("eigenvalue computation did not converge") from e
    with np.errstate(divide="ignore"):
        logs = np.log(moduli) + log_scale[:, None]
        pinned = None
        if dual_top is not None and dual_log_scale is not None:
            pinned = -(np.log(dual_top) + dual_log_scale)
    return _complete(logs, log_det, pinned)


def spectra_of(products: BallProducts) -> BallSpectra:
    """Cartan and Jordan tables for a batch of products."""
    args = (
        products.matrices,
        products.log_scale,
        products.log_det,
        products.dual_matrices,
        products.dual_log_scale,
    )
    return BallSpectra(
        radius=products.radius,
        lengths=products.lengths,
        cartan=cartan_vectors(*args),
        jordan=jordan_vectors(*args),
    )


def spectral(m: NormalizedMatrix, word: Word = (), dual: NormalizedMatrix | None = None) -> SpectrumSample:
    """Cartan and Jordan projections of one normalized product."""
    dual_args: tuple[np.ndarray | None, np.ndarray | None] = (None, None)
    if dual is not None:
        dual_args = (dual.matrix[None], np.array([dual.log_scale]))
    args = (m.matrix[None], np.array([m.log_scale]), np.array([m.log_det]), *dual_args)
    return SpectrumSample(
        word=tuple(word),
        length=len(word),
        cartan=tuple(float(x) for x in cartan_vectors(*args)[0]),
        jordan=tuple(float(x) for x in jordan_vectors(*args)[0]),
    )


def word_spectra(representation: Representation, words: Sequence[Word]) -> BallSpectra:
    """Spectra for an arbitrary list of words (e.g. conjugacy representatives)."""
    d = representation.dimension
    dual = dual_rep(representation) if d >= 3 else None
    count = len(words)
    matrices = np.empty((count, d, d))
    log_scale = np.empty(count)
    log_det = np.empty(count)
    dual_matrices = np.empty((count, d, d)) if dual is not None else None
    dual_log_scale = np.empty(count) if dual is not None else None
    for i, word in enumerate(words):
        m = evaluate(representation, word)
        matrices[i], log_scale[i], log_det[i] = m.matrix, m.log_scale, m.log_det
        if dual is not None and dual_matrices is not None and dual_log_scale is not None:
            md = evaluate(dual, word)
            dual_matrices[i], dual_log_scale[i] = md.matrix, md.log_scale
    lengths = np.array([len(w) for w in words], dtype=np.int64)
    products = BallProducts(
        radius=int(lengths.max()) if count else 0,
        lengths=lengths,
        matrices=matrices,
        log_scale=log_scale,
        log_det=log_det,
        dual_matrices=dual_matrices,
        dual_log_scale=dual_log_scale,
    )
    return spectra_of(products)


def cartan_oracle(representation: Representation, word: Word, bits: int = 256) -> np.ndarray:
    """Cartan projection from the eigenvalues of g g^T in extended precision."""
    d = representation.dimension
    with mpmath.workprec(bits):
        g = mpmath.eye(d)
        for s in word:
            g = g * mpmath.matrix(representation.matrices[s].tolist())
        eigenvalues, _ = mpmath.eigsy(g * g.T)
        logs = sorted((mpmath.log(eigenvalues[i]) / 2 for i in range(d)), reverse=True)
        mean = mpmath.fsum(logs) / d
        return np.array([float(x - mean) for x in logs])


# ---------------------------------------------------------------------------
# Attractors and projective geometry
# ---------------------------------------------------------------------------


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    """Unit vector with its largest-magnitude entry positive."""
    v = v / np.linalg.norm(v)
    return v if v[np.argmax(np.abs(v))] >= 0 else -v


def _svd(m: NormalizedMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        return np.linalg.svd(m.matrix)
    except np.linalg.LinAlgError as e:
        raise NumericError("singular value decomposition did not converge") from e


def _gap(singular: np.ndarray, i: int) -> float:
    with np.errstate(divide="ignore"):
        return float(np.log(singular[i]) - np.log(singular[i + 1]))


def _tolerance(tolerance: float | None) -> float:
    return tolerance if tolerance is not None else get_settings().numerics.gap_tolerance


def cartan_attractor(m: NormalizedMatrix, tolerance: float | None = None) -> np.ndarray:
    """U1(g): top left-singular direction.

    Raises:
        AmbiguousAttractorError: If tau_1(a(g)) is below tolerance
    """
    u, s, _ = _svd(m)
    gap = _gap(s, 0)
    if gap < _tolerance(tolerance):
        raise AmbiguousAttractorError(f"top singular gap {gap:.3g} too small for an attractor", gap)
    return _canonical_sign(u[:, 0])


def cartan_hyperplane(m: NormalizedMatrix, tolerance: float | None = None) -> np.ndarray:
    """Normal covector of U_{d-1}(g), the span of the top d-1 left-singular directions."""
    u, s, _ = _svd(m)
    d = m.dimension
    gap = _gap(s, d - 2)
    if gap < _tolerance(tolerance):
        raise AmbiguousAttractorError(f"bottom singular gap {gap:.3g} too small for a hyperplane", gap)
    return _canonical_sign(u[:, d - 1])


def cartan_repeller(m: NormalizedMatrix, tolerance: float | None = None) -> np.ndarray:
    """Normal covector of U_{d-1}(g^-1), the repelling hyperplane of g."""
    _, s, vt = _svd(m)
    gap = _gap(s, 0)
    if gap < _tolerance(tolerance):
        raise AmbiguousAttractorError(f"top singular gap {gap:.3g} too small for a repeller", gap)
    return _canonical_sign(vt[0])


def proj_dist(l1: np.ndarray, l2: np.ndarray) -> float:
    """Sine of the angle between two lines."""
    u = l1 / np.linalg.norm(l1)
    v = l2 / np.linalg.norm(l2)
    return float(min(1.0, np.linalg.norm(v - np.dot(u, v) * u)))


def gromov_product(covector: np.ndarray, line: np.ndarray, floor: float | None = None) -> float:
    """log sin of the angle between a line and the hyperplane ker(covector), clamped below."""
    limit = floor if floor is not None else get_settings().numerics.gromov_floor
    value = abs(float(np.dot(covector, line))) / (np.linalg.norm(covector) * np.linalg.norm(line))
    if value <= 0.0:
        return limit
    return max(limit, math.log(min(1.0, value)))


def attracting_line(g: np.ndarray) -> np.ndarray:
    """Eigenline of the eigenvalue of largest modulus (real for proximal g)."""
    values, vectors = np.linalg.eig(g)
    top = int(np.argmax(np.abs(values)))
    return _canonical_sign(np.real(vectors[:, top]))


def contraction_rate(g: np.ndarray, v: np.ndarray, n_range: tuple[int, int] = (10, 40)) -> float:
    """Regression slope of log d(g^n v, g+) against n; equals -tau_1(lambda(g)) for proximal g."""
    target = attracting_line(g)
    start, stop = n_range
    w = v / np.linalg.norm(v)
    ns: list[int] = []
    logs: list[float] = []
    for n in range(1, stop + 1):
        w = g @ w
        w = w / np.linalg.norm(w)
        if n >= start:
            dist = proj_dist(w, target)
            if dist > 1e-13:
                ns.append(n)
                logs.append(math.log(dist))
    if len(ns) < 3:
        raise NumericError("contraction reached machine precision before the fit range")
    return float(stats.linregress(ns, logs).slope)


def _as_normalized(matrix: np.ndarray, log_det: float) -> NormalizedMatrix:
    norm = float(np.linalg.norm(matrix))
    return NormalizedMatrix(matrix=matrix / norm, log_scale=math.log(norm), log_det=log_det)


def max_generator_step(representation: Representation) -> float:
    """max over generators of a1(s) + a1(s^-1), the coarse-stability bound."""
    inverses = representation.presentation.inverses
    log_det = representation.log_abs_det
    best = 0.0
    for s, m in enumerate(representation.matrices):
        t = inverses[s]
        a_s = spectral(_as_normalized(m, float(log_det[s]))).cartan[0]
        a_inv = spectral(_as_normalized(representation.matrices[t], float(log_det[t]))).cartan[0]
        best = max(best, a_s + a_inv)
    return best
