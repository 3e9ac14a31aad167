"""Built-in test varieties used by the selftest and the acceptance suite.

Dimension and degree are asserted, as everywhere else in the package:
    hyperbola   x*y = 1            r=2  n=1  d=2   (Kloosterman curve)
    product3    x1*x2*x3 = 1       r=3  n=2  d=3   (inverse-triple hypersurface)
    surface     x3 = x1*x2         r=3  n=2  d=2
    elliptic    y^2 = x^3 + x      r=2  n=1  d=3
    plane       (empty system)     r=2  n=2  d=1   (all of A^2)
"""

from __future__ import annotations

from .variety import VarietySpec

HYPERBOLA = VarietySpec.from_texts("hyperbola", 2, ["x1*x2 - 1"], 1, 2)
PRODUCT3 = VarietySpec.from_texts("product3", 3, ["x1*x2*x3 - 1"], 2, 3)
SURFACE = VarietySpec.from_texts("surface", 3, ["x3 - x1*x2"], 2, 2)
ELLIPTIC = VarietySpec.from_texts("elliptic", 2, ["x2^2 - x1^3 - x1"], 1, 3)
PLANE = VarietySpec.from_texts("plane", 2, [], 2, 1)

CATALOG = (HYPERBOLA, PRODUCT3, SURFACE, ELLIPTIC, PLANE)


def by_label(label: str) -> VarietySpec:
    for v in CATALOG:
        if v.label == label:
            return v
    raise KeyError(label)
