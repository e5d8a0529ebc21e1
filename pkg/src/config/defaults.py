"""Built-in example definitions.

This module defines the named representations and presentations the catalog
can build without any input file. Parameterized entries take one real
argument in parentheses, e.g. ``triangle-334-vinberg(0.7)``.
"""

# Named presentations, as one-liners understood by parse_presentation.
DEFAULT_PRESENTATIONS: dict[str, str] = {
    "free-2": "free rank=2",
    "surface-g2": "surface genus=2",
    "surface-g3": "surface genus=3",
    "triangle-334": "triangle 3 3 4",
}

# Catalog representations with the default of their deformation parameter (None: not parameterized).
DEFAULT_CATALOG: dict[str, float | None] = {
    "fuchsian-g2-sym2": None,  # regular-octagon genus-2 Fuchsian representation lifted by Sym2 to SL(3,R)
    "fuchsian-g3-sym2": None,  # regular 12-gon genus-3 representation lifted by Sym2
    "fuchsian-g2": None,  # regular-octagon genus-2 Fuchsian representation in SL(2,R)
    "fuchsian-g3": None,  # regular 12-gon genus-3 representation in SL(2,R)
    "triangle-334-vinberg": 0.0,  # (3,3,4) reflection group; t=0 preserves a Lorentzian form
    "f2-schottky": 1.5,  # two hyperbolic SL(2,R) generators with disjoint axes, lifted by Sym2
}
