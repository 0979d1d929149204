"""formaldisc: exact truncated algebra of the formal symplectic polydisc.

Subpackages cover sparse power-series arithmetic and differential forms
(`series`), the normal-ordered Weyl algebra and its split first-order model
(`weyl`), graded Lie algebra towers with their extensions and splittings
(`liealg`, `tower`), Chevalley-Eilenberg cohomology over exact rationals
(`cohomology`), formal Darboux normalization and transported star products
(`darboux`), and a small expression language plus CLI (`exprs`, `cli`).
"""

from .errors import CheckFailure, InternalError, UsageError
from .series import (
    DifferentialForm,
    Monomial,
    PoissonBivector,
    TruncatedPoly,
    de_rham_d,
    poisson_bracket,
    standard_poisson,
    wedge,
)
from .weyl import (
    D1Element,
    TruncationSpec,
    WeylElement,
    center_check,
    commutator,
    d1_bracket,
    d1_product,
    even_lift,
    induced_poisson,
    iota,
    mod_h,
    normal_order,
    star,
)

__all__ = [
    "CheckFailure",
    "D1Element",
    "DifferentialForm",
    "InternalError",
    "Monomial",
    "PoissonBivector",
    "TruncatedPoly",
    "TruncationSpec",
    "UsageError",
    "WeylElement",
    "center_check",
    "commutator",
    "d1_bracket",
    "d1_product",
    "de_rham_d",
    "even_lift",
    "induced_poisson",
    "iota",
    "mod_h",
    "normal_order",
    "poisson_bracket",
    "standard_poisson",
    "star",
    "wedge",
]

__version__ = "0.1.0"
