"""Weighted composition operators with affine symbols on Fock spaces.

Closed-form boundedness and compactness tests, Fock norms, iterate
formulas and the dynamics diagnostics built on top of them.
"""

__version__ = "0.1.0"

from .complexfn import ExpQuadratic, PolyTimesExpQuad, TaylorSeries  # noqa: E402
from .fockspace import Flavor, FockContext, fock_norm, membership  # noqa: E402
from .wcomp import AffineSymbol, Verdict, WeightedCompOp, classify  # noqa: E402

__all__ = [
    "__version__",
    "ExpQuadratic",
    "PolyTimesExpQuad",
    "TaylorSeries",
    "Flavor",
    "FockContext",
    "fock_norm",
    "membership",
    "AffineSymbol",
    "Verdict",
    "WeightedCompOp",
    "classify",
]
