"""Finite algebras: term conditions, clones, congruences and certified constructions."""

__version__ = "0.1.0"

from .algebra import (
    AlgebraError,
    FiniteAlgebra,
    NotACongruenceError,
    ResourceLimitError,
    eval_term,
    holds_identity,
    power,
    quotient_algebra,
    subalgebra,
    subuniverse_closure,
)
from .centrality import (
    check_affine,
    check_matrix_condition,
    check_property_p,
    check_rectangular,
    check_strongly_solvable,
    congruence_strongly_abelian,
    matrix_set,
    search_rectangulating_order,
    term_condition_c11,
)
from .clones import find_maltsev, polynomial_clone, term_clone, unary_polynomials
from .relations import (
    BinaryRelation,
    Congruence,
    InternalCheckError,
    all_congruences,
    compatible_closure,
    congruence_generated,
    validate,
)
from .terms import Op, Var, parse_term, to_prefix
from .verdict import Outcome, Verdict
