"""Finite-scale universal algebraic geometry: closures, closed congruences,
geometric and automorphic equivalence of finite algebras."""
from ._kernels import BACKEND
from .algebra import (
    FiniteAlgebra,
    FunctionalVerdict,
    Signature,
    SubalgebraClosure,
    apply_op,
    direct_product,
    generate_subalgebra,
    graph_functional,
    is_homomorphism,
    trivial_algebra,
)
from .geometry import (
    ClosedCongruence,
    CoordinateAlgebra,
    GeomVerdict,
    PointSet,
    QuotientHom,
    closure,
    congruence_contains,
    congruence_equal,
    coordinate_algebra,
    enumerate_closed,
    factors_through,
    galois_close_points,
    geom_equiv,
    induced_hom,
    is_cl_morphism,
    lift_hom,
    relatively_free,
    solutions,
)
from .terms import App, EquationSystem, Point, TermMorphism, Var, enumerate_points, enumerate_terms, eval_term, substitute
from .verbal import (
    ApplicabilityReport,
    AutoEqVerdict,
    InnerWitness,
    WordSystem,
    apply_automorphism_to_morphism,
    auto_equiv,
    check_applicable_rel,
    derive_algebra,
    inner_search,
    transport_closed,
)

__version__ = "0.1.0"

__all__ = [
    "App",
    "ApplicabilityReport",
    "AutoEqVerdict",
    "BACKEND",
    "ClosedCongruence",
    "CoordinateAlgebra",
    "EquationSystem",
    "FiniteAlgebra",
    "FunctionalVerdict",
    "GeomVerdict",
    "InnerWitness",
    "Point",
    "PointSet",
    "QuotientHom",
    "Signature",
    "SubalgebraClosure",
    "TermMorphism",
    "Var",
    "WordSystem",
    "apply_automorphism_to_morphism",
    "apply_op",
    "auto_equiv",
    "check_applicable_rel",
    "closure",
    "congruence_contains",
    "congruence_equal",
    "coordinate_algebra",
    "derive_algebra",
    "direct_product",
    "enumerate_closed",
    "enumerate_points",
    "enumerate_terms",
    "eval_term",
    "factors_through",
    "galois_close_points",
    "generate_subalgebra",
    "geom_equiv",
    "graph_functional",
    "induced_hom",
    "inner_search",
    "is_cl_morphism",
    "is_homomorphism",
    "lift_hom",
    "relatively_free",
    "solutions",
    "substitute",
    "transport_closed",
    "trivial_algebra",
    "__version__",
]
