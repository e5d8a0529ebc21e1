"""Example catalog: built-in presentations and representations.

Resolves names such as ``fuchsian-g2-sym2``, ``triangle-334-vinberg(0.7)`` and
``f2-schottky(1.5)`` as well as paths to presentation/representation files.
"""

import itertools
import math
import re
from pathlib import Path

import numpy as np

from src.config.defaults import DEFAULT_CATALOG, DEFAULT_PRESENTATIONS
from src.config.logging import get_logger
from src.models.group import Presentation, PresentationKind
from src.models.representation import Representation
from src.services.errors import InputError, NumericError
from src.services.group_core import parse_presentation, surface_presentation, triangle_presentation
from src.services.replin import parse_representation, sym2_lift

logger = get_logger(__name__)

_PARAMETERIZED = re.compile(r"^(?P<base>[a-z0-9\-]+?)(?:\((?P<param>[-+0-9.eE]+)\))?$")
_FUCHSIAN = re.compile(r"^fuchsian-g(?P<genus>\d+)(?P<sym2>-sym2)?$")
_TRIANGLE = re.compile(r"^triangle-(?P<p>\d)(?P<q>\d)(?P<r>\d)-vinberg$")


class CatalogError(InputError):
    """Raised for unknown catalog names or invalid catalog parameters."""

    code = "unknown-catalog-entry"


def _rotation(angle: float) -> np.ndarray:
    """Elliptic element of SL(2,R) rotating the hyperbolic plane by ``angle`` about i."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]])


def _sl2_inverse(m: np.ndarray) -> np.ndarray:
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def _close_to_pm_identity(m: np.ndarray, tolerance: float = 1e-8) -> bool:
    eye = np.eye(m.shape[0])
    return bool(min(np.max(np.abs(m - eye)), np.max(np.abs(m + eye))) < tolerance)


def fuchsian_surface_rep(genus: int) -> Representation:
    """Side pairings of the regular hyperbolic 4g-gon with all angles 2pi/4g.

    Side j+2 is paired with side j for j = 0, 1 mod 4. The handle-to-pairing
    assignment and inversion conventions are chosen so that the commutator
    relator evaluates to +-Id.

    Raises:
        NumericError: If no convention satisfies the relator
    """
    if not 2 <= genus <= 4:
        raise CatalogError(f"Fuchsian catalog genus must be between 2 and 4, got {genus}")
    sides = 4 * genus
    r = math.acosh(1.0 / math.tan(math.pi / sides))
    a = np.diag([math.exp(r / 2), math.exp(-r / 2)])
    half_turn = a @ _rotation(math.pi) @ _sl2_inverse(a)
    offset = _rotation(-4 * math.pi / sides)

    def pairing(j: int) -> np.ndarray:
        theta = 2 * math.pi * j / sides
        return _rotation(theta) @ half_turn @ _rotation(-theta) @ offset

    handles = [(pairing(4 * i), pairing(4 * i + 1)) for i in range(genus)]
    presentation = surface_presentation(genus)

    for order in itertools.permutations(range(genus)):
        for choice in itertools.product(range(8), repeat=genus):
            matrices: list[np.ndarray] = []
            relator = np.eye(2)
            for slot, handle in enumerate(order):
                x, y = handles[handle]
                bits = choice[slot]
                if bits & 1:
                    x = _sl2_inverse(x)
                if bits & 2:
                    y = _sl2_inverse(y)
                if bits & 4:
                    x, y = y, x
                relator = relator @ x @ y @ _sl2_inverse(x) @ _sl2_inverse(y)
                matrices += [x, _sl2_inverse(x), y, _sl2_inverse(y)]
            if _close_to_pm_identity(relator):
                logger.debug("fuchsian_convention_found", genus=genus, order=order, choice=choice)
                return Representation(
                    name=f"fuchsian-g{genus}", presentation=presentation, matrices=tuple(matrices)
                )
    raise NumericError(f"no side-pairing convention satisfies the genus-{genus} relator")


def _reflection_cartan_matrix(orders: tuple[int, int, int], t: float) -> np.ndarray:
    m12, m23, m31 = orders
    c = np.eye(3) * 2.0
    c[0, 1] = -2.0 * math.cos(math.pi / m12) * math.exp(t)
    c[1, 0] = -2.0 * math.cos(math.pi / m12) * math.exp(-t)
    c[1, 2] = c[2, 1] = -2.0 * math.cos(math.pi / m23)
    c[2, 0] = c[0, 2] = -2.0 * math.cos(math.pi / m31)
    return c


def vinberg_rep(orders: tuple[int, int, int], t: float) -> Representation:
    """Linear reflection group R_i = I - e_i (row i of the Cartan matrix).

    The off-diagonal pair (1,2) of the Cartan matrix is scaled by e^t and e^-t,
    which keeps every (r_i r_j)^m_ij trivial and deforms the cyclic product.
    All members are conjugated by the frame that turns the t=0 invariant form
    into diag(1, 1, -1), so t=0 lies in O(2,1) with symmetric singular values.
    """
    presentation = triangle_presentation(*orders)
    symmetric = _reflection_cartan_matrix(orders, 0.0)
    values, vectors = np.linalg.eigh(symmetric)
    order = np.argsort(-values)
    frame = vectors[:, order] @ np.diag(1.0 / np.sqrt(np.abs(values[order])))
    frame_inverse = np.linalg.inv(frame)

    cartan = _reflection_cartan_matrix(orders, t)
    matrices = []
    for i in range(3):
        reflection = np.eye(3) - np.outer(np.eye(3)[i], cartan[i])
        matrices.append(frame_inverse @ reflection @ frame)
    p, q, r = orders
    return Representation(
        name=f"triangle-{p}{q}{r}-vinberg({t:g})", presentation=presentation, matrices=tuple(matrices)
    )


def schottky_rep(s: float, separation: float = 2.0) -> Representation:
    """Sym2 of two hyperbolic SL(2,R) elements with nested, disjoint axes.

    a translates by 2s along the geodesic from -1 to 1; b is a conjugated by
    z -> e^separation z, whose isometric circles stay disjoint from those of a
    for s >= 0.8.
    """
    if s < 0.8:
        raise CatalogError(f"f2-schottky parameter must be >= 0.8 for disjoint isometric circles, got {s}")
    a = np.array([[math.cosh(s), math.sinh(s)], [math.sinh(s), math.cosh(s)]])
    m = np.diag([math.exp(separation / 2), math.exp(-separation / 2)])
    b = m @ a @ np.diag([math.exp(-separation / 2), math.exp(separation / 2)])
    presentation = parse_presentation("free rank=2")
    base = Representation(
        name=f"f2-schottky({s:g})",
        presentation=presentation,
        matrices=(a, _sl2_inverse(a), b, _sl2_inverse(b)),
    )
    lifted = sym2_lift(base)
    return lifted.model_copy(update={"name": base.name})


class ExampleCatalog:
    """Resolves presentation and representation references."""

    def names(self) -> list[str]:
        """Catalog representation names (parameterized ones without arguments)."""
        return sorted(DEFAULT_CATALOG)

    def presentation(self, ref: str) -> Presentation:
        """Named presentation, presentation file, or inline one-line document.

        Raises:
            InputError: If the reference cannot be parsed
        """
        text = DEFAULT_PRESENTATIONS.get(ref)
        if text is not None:
            return parse_presentation(text, name=ref)
        path = Path(ref)
        if path.is_file():
            return parse_presentation(path.read_text(), name=path.stem)
        return parse_presentation(ref)

    def representation(self, ref: str) -> Representation:
        """Catalog name (with optional parameter) or representation file.

        Raises:
            CatalogError: If the reference is neither a catalog name nor a file
        """
        match = _PARAMETERIZED.match(ref)
        if match:
            base, raw = match.group("base"), match.group("param")
            param = float(raw) if raw is not None else None
            built = self._build(base, param)
            if built is not None:
                logger.debug("catalog_representation_built", name=built.name)
                return built
        path = Path(ref)
        if path.is_file():
            return parse_representation(path.read_text(), name=path.stem, resolve_presentation=self.presentation)
        raise CatalogError(f"unknown representation '{ref}'; catalog has {', '.join(self.names())}")

    def _build(self, base: str, param: float | None) -> Representation | None:
        fuchsian = _FUCHSIAN.match(base)
        if fuchsian:
            rep = fuchsian_surface_rep(int(fuchsian.group("genus")))
            if fuchsian.group("sym2"):
                lifted = sym2_lift(rep)
                return lifted.model_copy(update={"name": base})
            return rep
        triangle = _TRIANGLE.match(base)
        if triangle:
            orders = (int(triangle.group("p")), int(triangle.group("q")), int(triangle.group("r")))
            return vinberg_rep(orders, 0.0 if param is None else param)
        if base == "f2-schottky":
            return schottky_rep(param if param is not None else DEFAULT_CATALOG["f2-schottky"] or 1.5)
        return None

    def reference(self, presentation: Presentation) -> Representation | None:
        """Reference Fuchsian representation used for cyclic ordering, if the family has one."""
        if presentation.kind == PresentationKind.SURFACE:
            return fuchsian_surface_rep(int(presentation.parameters["genus"]))
        if presentation.kind == PresentationKind.TRIANGLE:
            orders = tuple(int(x) for x in presentation.parameters["orders"])
            return vinberg_rep((orders[0], orders[1], orders[2]), 0.0)
        return None
