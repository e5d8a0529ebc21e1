"""Combinatorics of word-hyperbolic groups.

Implements presentation parsing, the word problem (free reduction, Dehn
reduction with shortlex closure, and the Tits descent test for triangle
Coxeter groups), shortlex sphere/ball enumeration, approximate cone types,
conjugacy representatives and geodesic rays.
"""

import hashlib
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable

import numpy as np
import psutil

from src.config.logging import get_logger
from src.config.settings import EnumerationSettings, get_settings
from src.models.group import BallEnumeration, ConeTypeId, Presentation, PresentationKind, Ray, Word
from src.services.errors import InputError, ResourceCapError

logger = get_logger(__name__)

_FREE_LETTERS = "abcdefghijklmnopqrstuvwxyz"


class PresentationParseError(InputError):
    """Raised when a presentation document is malformed."""

    code = "presentation-parse"


class EnumerationLimitError(ResourceCapError):
    """Raised when ball enumeration exceeds the element or memory budget.

    Attributes:
        completed_radius: Largest radius whose ball was fully enumerated
        partial: The completed ball, usable by callers that can degrade gracefully
    """

    code = "enumeration-limit"

    def __init__(self, message: str, completed_radius: int, partial: BallEnumeration | None = None):
        super().__init__(message)
        self.completed_radius = completed_radius
        self.partial = partial


class RayConstructionError(InputError):
    """Raised when a requested ray is not a normal-form geodesic."""

    code = "invalid-ray"


# ---------------------------------------------------------------------------
# Presentations
# ---------------------------------------------------------------------------


def free_presentation(rank: int) -> Presentation:
    """Free group on ``rank`` generators a, b, ... with inverses A, B, ..."""
    if not 1 <= rank <= len(_FREE_LETTERS):
        raise PresentationParseError(f"free rank must be between 1 and 26, got {rank}")
    names: list[str] = []
    inverses: list[int] = []
    for i in range(rank):
        names += [_FREE_LETTERS[i], _FREE_LETTERS[i].upper()]
        inverses += [2 * i + 1, 2 * i]
    return Presentation(
        name=f"free-{rank}",
        kind=PresentationKind.FREE,
        generators=tuple(names),
        inverses=tuple(inverses),
        parameters={"rank": rank},
    )


def surface_presentation(genus: int) -> Presentation:
    """Closed orientable surface group with relator [a1,b1]...[ag,bg]."""
    if genus < 2:
        raise PresentationParseError(f"surface genus must be >= 2 for a hyperbolic group, got {genus}")
    names: list[str] = []
    inverses: list[int] = []
    relator: list[int] = []
    for i in range(1, genus + 1):
        base = len(names)
        names += [f"a{i}", f"A{i}", f"b{i}", f"B{i}"]
        inverses += [base + 1, base, base + 3, base + 2]
        relator += [base, base + 2, base + 1, base + 3]
    return Presentation(
        name=f"surface-g{genus}",
        kind=PresentationKind.SURFACE,
        generators=tuple(names),
        inverses=tuple(inverses),
        relators=(tuple(relator),),
        parameters={"genus": genus},
    )


def triangle_presentation(p: int, q: int, r: int) -> Presentation:
    """Triangle Coxeter group with involutions r1, r2, r3.

    The involution relators r_i^2 are carried by the inverse table; the stored
    relators are (r1 r2)^p, (r2 r3)^q, (r3 r1)^r.
    """
    orders = (p, q, r)
    if any(m < 2 for m in orders):
        raise PresentationParseError(f"triangle orders must be >= 2, got {orders}")
    if sum(1.0 / m for m in orders) >= 1.0:
        raise PresentationParseError(f"triangle ({p},{q},{r}) is not hyperbolic")
    pairs = ((0, 1), (1, 2), (2, 0))
    relators = tuple((i, j) * m for (i, j), m in zip(pairs, orders))
    return Presentation(
        name=f"triangle-{p}{q}{r}",
        kind=PresentationKind.TRIANGLE,
        generators=("r1", "r2", "r3"),
        inverses=(0, 1, 2),
        relators=relators,
        parameters={"orders": [p, q, r]},
    )


def _parse_parameters(tokens: list[str]) -> dict[str, str]:
    params: dict[str, str] = {}
    positional: list[str] = []
    for token in tokens:
        if "=" in token:
            key, _, value = token.partition("=")
            params[key.strip().lower()] = value.strip()
        else:
            positional.append(token)
    if positional:
        params["_positional"] = " ".join(positional)
    return params


def parse_presentation(text: str, name: str | None = None) -> Presentation:
    """Parse a presentation document.

    Accepts a one-line form (``free rank=2``, ``surface genus=2``,
    ``triangle 3 3 4``) or the multi-line form starting with ``kind <family>``
    followed by parameter lines (``rank 2``, ``genus 2``, ``orders 3 3 4``) and
    optional ``relator <letters>`` lines. ``#`` starts a comment.

    Args:
        text: Presentation document
        name: Optional name override

    Returns:
        Validated Presentation

    Raises:
        PresentationParseError: On malformed grammar or unknown generators
    """
    lines = [line.split("#", 1)[0].strip() for line in text.splitlines()]
    lines = [line for line in lines if line]
    if not lines:
        raise PresentationParseError("empty presentation document")

    head = lines[0].split()
    if head[0].lower() == "kind":
        if len(head) < 2:
            raise PresentationParseError("'kind' line needs a family name")
        kind_name = head[1].lower()
        params = _parse_parameters(head[2:])
        body = lines[1:]
    else:
        kind_name = head[0].lower()
        params = _parse_parameters(head[1:])
        body = lines[1:]

    extra_relators: list[str] = []
    for line in body:
        key, _, rest = line.partition(" ")
        key = key.lower().rstrip(":")
        if key == "relator":
            extra_relators.append(rest.strip())
        elif "=" in key:
            params.update(_parse_parameters([line]))
        elif rest:
            params[key] = rest.strip()
        else:
            raise PresentationParseError(f"cannot parse presentation line: '{line}'")

    try:
        if kind_name == "free":
            rank = int(params.get("rank", params.get("_positional", "2")))
            presentation = free_presentation(rank)
        elif kind_name == "surface":
            genus = int(params.get("genus", params.get("_positional", "2")))
            presentation = surface_presentation(genus)
        elif kind_name == "triangle":
            raw = params.get("orders", params.get("_positional", ""))
            orders = [int(x) for x in raw.replace(",", " ").split()]
            if len(orders) != 3:
                raise PresentationParseError(f"triangle needs three orders, got '{raw}'")
            presentation = triangle_presentation(*orders)
        else:
            raise PresentationParseError(f"unknown presentation kind '{kind_name}'")
    except ValueError as e:
        raise PresentationParseError(f"invalid presentation parameters: {e}") from e

    if extra_relators:
        words = []
        for raw in extra_relators:
            try:
                words.append(presentation.parse_word(raw))
            except KeyError as e:
                raise PresentationParseError(f"relator uses unknown generator: {e}") from e
        logger.warning(
            "extra_relators_added",
            presentation=presentation.name,
            count=len(words),
            note="word problem is only guaranteed for the standard families",
        )
        try:
            presentation = presentation.model_copy(
                update={"relators": presentation.relators + tuple(words)}
            )
            Presentation.model_validate(presentation.model_dump())
        except ValueError as e:
            raise PresentationParseError(str(e)) from e

    if name:
        presentation = presentation.model_copy(update={"name": name})
    return presentation


# ---------------------------------------------------------------------------
# Word problem
# ---------------------------------------------------------------------------


def free_reduce(word: Iterable[int], inverses: tuple[int, ...]) -> Word:
    """Cancel adjacent x x^-1 pairs."""
    stack: list[int] = []
    for s in word:
        if stack and inverses[stack[-1]] == s:
            stack.pop()
        else:
            stack.append(s)
    return tuple(stack)


class RewritingSystem:
    """Relator-subword replacements derived from a presentation.

    For every cyclic rotation c of a relator or its inverse and every split
    c = u v with |u| >= |c|/2, u may be replaced by v^-1. Splits with
    |u| > |c|/2 shorten the word; |u| = |c|/2 preserves length.
    """

    def __init__(self, presentation: Presentation):
        self.inverses = presentation.inverses
        self.reducing: dict[Word, Word] = {}
        self.preserving: dict[Word, set[Word]] = {}

        for relator in presentation.relators:
            for cyclic in (relator, presentation.inverse_word(relator)):
                size = len(cyclic)
                for shift in range(size):
                    rotated = cyclic[shift:] + cyclic[:shift]
                    for k in range((size + 1) // 2, size + 1):
                        lhs = rotated[:k]
                        rhs = presentation.inverse_word(rotated[k:])
                        if 2 * k > size:
                            best = self.reducing.get(lhs)
                            if best is None or (len(rhs), rhs) < (len(best), best):
                                self.reducing[lhs] = rhs
                        elif rhs != lhs:
                            self.preserving.setdefault(lhs, set()).add(rhs)

        self.reducing_lengths = sorted({len(k) for k in self.reducing}, reverse=True)
        self.preserving_lengths = sorted({len(k) for k in self.preserving})

    def find_reduction(self, word: Word) -> tuple[int, int] | None:
        """First (position, length) of a shortening rule or a free cancellation."""
        inv = self.inverses
        n = len(word)
        for i in range(n):
            if i + 1 < n and inv[word[i]] == word[i + 1]:
                return i, 2
            for k in self.reducing_lengths:
                if i + k <= n and word[i : i + k] in self.reducing:
                    return i, k
        return None

    def dehn_reduce(self, word: Word) -> Word:
        """Apply shortening rules until none applies."""
        current = free_reduce(word, self.inverses)
        while True:
            hit = self.find_reduction(current)
            if hit is None:
                return current
            i, k = hit
            lhs = current[i : i + k]
            rhs = self.reducing.get(lhs, ())
            current = free_reduce(current[:i] + rhs + current[i + k :], self.inverses)

    def swaps(self, word: Word) -> Iterable[Word]:
        """All words one length-preserving rewrite away."""
        n = len(word)
        for k in self.preserving_lengths:
            for i in range(n - k + 1):
                targets = self.preserving.get(word[i : i + k])
                if targets:
                    for rhs in targets:
                        yield word[:i] + rhs + word[i + k :]


class CoxeterDescentOracle:
    """Shortlex normal forms for triangle Coxeter groups via the Tits representation.

    Uses the geometric representation on the span of the simple roots:
    l(s g) < l(g) exactly when g^-1(alpha_s) is a negative root, i.e. when the
    coordinates of column s of sigma(g^-1) sum to a negative number.
    """

    def __init__(self, presentation: Presentation):
        orders = presentation.parameters["orders"]
        m = np.full((3, 3), 1, dtype=float)
        for (i, j), order in zip(((0, 1), (1, 2), (2, 0)), orders):
            m[i, j] = m[j, i] = order
        self.reflections: list[np.ndarray] = []
        for i in range(3):
            sigma = np.eye(3)
            for j in range(3):
                sigma[i, j] = -1.0 if i == j else 2.0 * math.cos(math.pi / m[i, j])
            self.reflections.append(sigma)

    def normal_form(self, word: Word) -> Word | None:
        """Lex-first reduced word, or None when a descent test is numerically ambiguous."""
        inv = np.eye(3)
        for s in word:
            inv = self.reflections[s] @ inv
        result: list[int] = []
        while True:
            sums = inv.sum(axis=0)
            scale = np.abs(inv).sum(axis=0)
            found = -1
            for s in range(3):
                if abs(sums[s]) < 1e-7 * scale[s]:
                    return None
                if sums[s] < 0:
                    found = s
                    break
            if found < 0:
                return tuple(result)
            result.append(found)
            inv = inv @ self.reflections[found]


class WordProblemSolver:
    """Geodesic shortlex normal forms for a presentation.

    ``reduce`` is the rewriting engine: free reduction, Dehn reduction, then the
    shortlex-minimal word of the closure under length-preserving rewrites,
    restarting whenever the closure contains a shorter form. ``normal_form`` is
    the engine used by enumeration; it agrees with ``reduce`` and takes the
    linear-time descent test for triangle groups.
    """

    _CACHE_LIMIT = 1_000_000

    def __init__(self, presentation: Presentation, settings: EnumerationSettings | None = None):
        self.presentation = presentation
        self.settings = settings or get_settings().enumeration
        self.inverses = presentation.inverses
        self.rules = RewritingSystem(presentation)
        self.coxeter = (
            CoxeterDescentOracle(presentation) if presentation.kind == PresentationKind.TRIANGLE else None
        )
        self._cache: dict[Word, Word] = {}

    @property
    def is_free(self) -> bool:
        """True for presentations without relators."""
        return not self.presentation.relators

    def reduce(self, word: Iterable[int]) -> Word:
        """Geodesic shortlex normal form by rewriting (total, idempotent)."""
        word = tuple(word)
        if self.is_free:
            return free_reduce(word, self.inverses)
        cached = self._cache.get(word)
        if cached is not None:
            return cached

        current = self.rules.dehn_reduce(word)
        while True:
            closure, shorter = self._explore(current)
            if shorter is None:
                break
            current = self.rules.dehn_reduce(shorter)

        normal = min(closure)
        if len(self._cache) > self._CACHE_LIMIT:
            self._cache.clear()
        for member in closure:
            self._cache[member] = normal
        self._cache[word] = normal
        return normal

    def _explore(self, start: Word) -> tuple[set[Word], Word | None]:
        """Closure of a Dehn-reduced word under swaps, or a shortenable member."""
        seen = {start}
        queue = deque([start])
        while queue:
            current = queue.popleft()
            for candidate in self.rules.swaps(current):
                if candidate in seen:
                    continue
                if self.rules.find_reduction(candidate) is not None:
                    return seen, candidate
                seen.add(candidate)
                queue.append(candidate)
                if len(seen) > self.settings.closure_limit:
                    logger.warning("rewrite_closure_truncated", length=len(start), size=len(seen))
                    return seen, None
        return seen, None

    def normal_form(self, word: Iterable[int]) -> Word:
        """Shortlex geodesic normal form (same value as ``reduce``)."""
        word = tuple(word)
        if self.coxeter is not None:
            normal = self.coxeter.normal_form(word)
            if normal is not None:
                return normal
            logger.debug("descent_test_ambiguous", length=len(word))
        return self.reduce(word)

    def word_length(self, word: Iterable[int]) -> int:
        """|gamma| for the element spelled by ``word``."""
        return len(self.normal_form(word))

    def is_geodesic(self, word: Iterable[int]) -> bool:
        """True when the word has minimal length for its element."""
        word = tuple(word)
        return len(self.normal_form(word)) == len(word)

    def is_normal_form(self, word: Iterable[int]) -> bool:
        """True when the word is its own shortlex normal form."""
        word = tuple(word)
        return self.normal_form(word) == word

    def multiply(self, u: Word, v: Word) -> Word:
        """Normal form of u·v."""
        return self.normal_form(u + v)

    def inverse(self, word: Word) -> Word:
        """Normal form of word^-1."""
        return self.normal_form(self.presentation.inverse_word(word))


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _extend_layer(solver: WordProblemSolver, layer: list[Word]) -> tuple[list[Word], list[int], list[int]]:
    """Next sphere from a shortlex-sorted sphere.

    The shortlex normal form of g is NF(g s^-1)·s for the lexicographically
    least such pair, so scanning (w, s) in order and keeping w+s exactly when it
    is its own normal form lists every element once, already sorted.
    """
    inv = solver.inverses
    rank = solver.presentation.rank
    words: list[Word] = []
    parents: list[int] = []
    letters: list[int] = []
    for index, w in enumerate(layer):
        forbidden = inv[w[-1]] if w else -1
        for s in range(rank):
            if s == forbidden:
                continue
            candidate = w + (s,)
            if solver.is_free or solver.normal_form(candidate) == candidate:
                words.append(candidate)
                parents.append(index)
                letters.append(s)
    return words, parents, letters


def _enumerate_partition(presentation_json: str, first_letter: int, radius: int) -> list[list[Word]]:
    """Spheres 1..radius of normal forms starting with ``first_letter`` (worker entry point)."""
    presentation = Presentation.model_validate_json(presentation_json)
    solver = WordProblemSolver(presentation)
    layer = [(first_letter,)] if solver.is_normal_form((first_letter,)) else []
    spheres = [layer]
    for _ in range(1, radius):
        layer, _, _ = _extend_layer(solver, layer)
        spheres.append(layer)
    return spheres


class GroupEnumerator:
    """Incremental shortlex enumeration of balls in the Cayley graph.

    Each element records its parent (the normal form with the last letter
    removed) and that last letter, which is the prefix tree used by batched
    evaluation.
    """

    def __init__(self, solver: WordProblemSolver, settings: EnumerationSettings | None = None):
        self.solver = solver
        self.presentation = solver.presentation
        self.settings = settings or get_settings().enumeration
        self._words: list[Word] = [()]
        self._parents: list[int] = [-1]
        self._letters: list[int] = [-1]
        self._offsets: list[int] = [0, 1]
        self._process = psutil.Process()

    @property
    def radius(self) -> int:
        """Largest fully enumerated radius."""
        return len(self._offsets) - 2

    def _snapshot(self) -> BallEnumeration:
        return BallEnumeration(
            radius=self.radius,
            words=list(self._words),
            parents=np.asarray(self._parents, dtype=np.int64),
            letters=np.asarray(self._letters, dtype=np.int64),
            offsets=tuple(self._offsets),
        )

    def _check_budget(self, pending: int) -> None:
        total = len(self._words) + pending
        rss_mb = self._process.memory_info().rss / (1024 * 1024)
        if total > self.settings.max_elements or rss_mb > self.settings.memory_budget_mb:
            logger.error(
                "enumeration_budget_exceeded",
                completed_radius=self.radius,
                elements=total,
                rss_mb=round(rss_mb, 1),
            )
            raise EnumerationLimitError(
                f"enumeration budget exceeded after radius {self.radius} "
                f"({total} elements, {rss_mb:.0f} MB resident)",
                completed_radius=self.radius,
                partial=self._snapshot(),
            )

    def _grow_serial(self, radius: int) -> None:
        while self.radius < radius:
            start, end = self._offsets[-2], self._offsets[-1]
            layer = self._words[start:end]
            words, parents, letters = _extend_layer(self.solver, layer)
            self._check_budget(len(words))
            self._words.extend(words)
            self._parents.extend(start + p for p in parents)
            self._letters.extend(letters)
            self._offsets.append(len(self._words))
            logger.debug("sphere_enumerated", presentation=self.presentation.name, radius=self.radius, size=len(words))

    def _grow_parallel(self, radius: int) -> None:
        payload = self.presentation.model_dump_json()
        with ProcessPoolExecutor(max_workers=self.settings.workers) as pool:
            futures = [
                pool.submit(_enumerate_partition, payload, s, radius) for s in range(self.presentation.rank)
            ]
            partitions = [f.result() for f in futures]
        self._words, self._parents, self._letters, self._offsets = [()], [-1], [-1], [0, 1]
        index: dict[Word, int] = {(): 0}
        for n in range(radius):
            layer = [w for part in partitions for w in part[n]]
            self._check_budget(len(layer))
            for w in layer:
                index[w] = len(self._words)
                self._words.append(w)
                self._parents.append(index[w[:-1]])
                self._letters.append(w[-1])
            self._offsets.append(len(self._words))

    def ball(self, radius: int) -> BallEnumeration:
        """All normal forms of length <= radius in shortlex order.

        Raises:
            EnumerationLimitError: When the element or memory budget is exhausted
        """
        if radius < 0:
            raise InputError("radius must be >= 0")
        if radius > self.radius:
            if self.settings.workers > 1 and radius > 1:
                self._grow_parallel(radius)
            else:
                self._grow_serial(radius)
            logger.info(
                "ball_enumerated", presentation=self.presentation.name, radius=radius, size=len(self._words)
            )
        ball = self._snapshot()
        return ball if ball.radius == radius else ball.truncated(radius)

    def sphere(self, n: int) -> list[Word]:
        """Normal forms of length exactly n in shortlex order."""
        self.ball(n)
        return self._words[self._offsets[n] : self._offsets[n + 1]]

    # -- cone types -------------------------------------------------------

    def cone_type(self, element: Word, depth: int | None = None) -> ConeTypeId:
        """Depth-k approximate cone type of a normal form.

        witness = {h : |h| <= k and |gamma h| = |gamma| + |h|}; extensions are
        prefix closed, so h is tested only when its parent qualified.
        """
        k = self.settings.cone_depth if depth is None else depth
        if k > self.settings.max_cone_depth:
            raise InputError(f"cone depth {k} exceeds configured maximum {self.settings.max_cone_depth}")
        ball = self.ball(k)
        member = np.zeros(len(ball.words), dtype=bool)
        member[0] = True
        for i in range(1, len(ball.words)):
            if member[ball.parents[i]] and self.solver.is_geodesic(element + ball.words[i]):
                member[i] = True
        witness = frozenset(ball.words[i] for i in np.flatnonzero(member))
        return ConeTypeId(id=_witness_id(witness), depth=k, witness=witness)

    def cone_type_census(self, radius: int, depth: int) -> int:
        """Number of distinct depth-k cone types over ball(radius)."""
        ids = {self.cone_type(w, depth).id for w in self.ball(radius).words}
        logger.info("cone_type_census", radius=radius, depth=depth, distinct=len(ids))
        return len(ids)

    # -- conjugacy --------------------------------------------------------

    def conjugacy_reps(
        self, n: int, identify_inverse: bool = False, geodesic_only: bool | None = None
    ) -> list[Word]:
        """One cyclically reduced representative per rotation orbit, length <= n.

        Args:
            n: Maximal length
            identify_inverse: Also identify a cyclic word with its inverse
            geodesic_only: Keep only words whose every rotation is geodesic
                (default: on for presentations with relators)

        Returns:
            Representatives sorted by length, then lexicographically
        """
        if n < 1:
            raise InputError("n must be >= 1")
        presentation = self.presentation
        inv = presentation.inverses
        keep_geodesic = (not self.solver.is_free) if geodesic_only is None else geodesic_only
        reps: list[Word] = []

        def canonical(word: Word) -> Word:
            candidates = [word[i:] + word[:i] for i in range(len(word))]
            if identify_inverse:
                inverse = presentation.inverse_word(word)
                candidates += [inverse[i:] + inverse[:i] for i in range(len(inverse))]
            return min(candidates)

        stack: list[Word] = [(s,) for s in reversed(range(presentation.rank))]
        while stack:
            word = stack.pop()
            if len(word) < 2 or inv[word[-1]] != word[0]:
                if canonical(word) == word:
                    if not keep_geodesic or all(
                        self.solver.is_geodesic(word[i:] + word[:i]) for i in range(len(word))
                    ):
                        reps.append(word)
            if len(word) < n:
                for s in reversed(range(presentation.rank)):
                    if inv[word[-1]] != s:
                        stack.append(word + (s,))
        reps.sort(key=lambda w: (len(w), w))
        return reps

    # -- rays -------------------------------------------------------------

    def _extends(self, word: list[int], s: int, window: int) -> bool:
        if word and self.inverses_of(word[-1]) == s:
            return False
        if self.solver.is_free:
            return True
        candidate = tuple(word[-(window - 1) :]) + (s,) if len(word) >= window else tuple(word) + (s,)
        return self.solver.is_normal_form(candidate)

    def inverses_of(self, s: int) -> int:
        """Formal inverse of a letter."""
        return self.presentation.inverses[s]

    def geodesic_rays(self, depth: int, count: int, seed: int, window: int | None = None) -> list[Ray]:
        """Seeded random normal-form rays with backtracking.

        Each step extends the current word by a letter chosen uniformly among
        those keeping its trailing ``window`` letters a normal form. Rays no
        longer than ``window`` are exact normal forms. Longer rays are only
        window-local normal forms, hence quasi-geodesics once the window exceeds
        the local-to-global constant of the group; ``window >= depth`` makes the
        check exact at quadratic cost. Rays failing the full check are logged.
        """
        if depth < 1:
            raise InputError("depth must be >= 1")
        limit = window or get_settings().limitset.ray_window
        rng = np.random.default_rng(seed)
        rays: list[Ray] = []
        for _ in range(count):
            word: list[int] = []
            options: list[list[int]] = []
            backtracks = 0
            while len(word) < depth:
                if len(options) == len(word):
                    valid = [s for s in range(self.presentation.rank) if self._extends(word, s, limit)]
                    options.append([int(s) for s in rng.permutation(valid)])
                if options[-1]:
                    word.append(options[-1].pop())
                else:
                    options.pop()
                    if not word:
                        raise RayConstructionError("no geodesic extension exists from the identity")
                    word.pop()
                    backtracks += 1
                    if backtracks > self.settings.ray_max_backtracks:
                        raise RayConstructionError("geodesic ray construction exceeded backtrack budget")
            if len(word) > limit and not self.solver.is_normal_form(tuple(word)):
                logger.warning("ray_not_globally_normal", depth=depth, window=limit, seed=seed)
            rays.append(Ray(letters=tuple(word), seed=seed))
        logger.debug("rays_generated", count=count, depth=depth, seed=seed)
        return rays

    def periodic_ray(self, word: Word, depth: int) -> Ray:
        """Ray following the powers of ``word``, truncated at ``depth``.

        Raises:
            RayConstructionError: If the truncated power is not a normal form
        """
        if not word:
            raise RayConstructionError("periodic ray needs a nonempty word")
        letters = (word * (depth // len(word) + 1))[:depth]
        if not self.solver.is_normal_form(letters):
            raise RayConstructionError(
                f"powers of {self.presentation.format_word(word)} are not normal forms up to depth {depth}"
            )
        return Ray(letters=letters)


def _witness_id(witness: frozenset[Word]) -> int:
    digest = hashlib.blake2b(digest_size=8)
    for h in sorted(witness, key=lambda w: (len(w), w)):
        digest.update(",".join(map(str, h)).encode())
        digest.update(b"|")
    return int.from_bytes(digest.digest(), "big")


def build_solver(presentation: Presentation) -> tuple[WordProblemSolver, GroupEnumerator]:
    """Solver plus enumerator sharing the same memo."""
    solver = WordProblemSolver(presentation)
    return solver, GroupEnumerator(solver)
