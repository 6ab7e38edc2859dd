"""Computing with finite k-potent commutative integral residuated lattices:
validation, enumeration up to isomorphism, canonical formulas, embedding and
refutation characterizations, and desk-scale theorem verification."""

from .algebra import (
    DeductiveFilter,
    FiniteRL,
    all_deductive_filters,
    all_si_quotients,
    canonical_form,
    filter_generated,
    is_isomorphic,
    is_subdirectly_irreducible,
    is_well_connected,
    prepend_bottom,
    quotient,
    validate,
)
from .axioms import (
    StableAxiomatization,
    bounded_linear_variety_axioms,
    check_stability,
    family_algebras,
    fmp_witness,
    linear_variety_axioms,
    model_class,
    nonlinear_witness_subalgebra,
)
from .canonical import (
    CanonicalFormula,
    Certificate,
    DSpec,
    associated_system,
    build_canonical,
    find_d_embedding,
    gamma_counterexample,
    is_d_embedding,
    iter_d_embeddings,
    lift_embedding,
    refutation_certificate,
    refutes_1,
)
from .closure import (
    PartialSubalgebra,
    closure_mult_join_one,
    complete_to_rl,
    refuting_subalgebra,
)
from .enumeration import (
    Catalog,
    check_lattice,
    diamond_chain_algebra,
    diamond_chain_lattice,
    enumerate_kcirl,
    enumerate_lattices,
    is_linear,
    lattice_canonical_form,
)
from .errors import (
    FormulaSyntaxError,
    KcirlError,
    KMismatch,
    LawViolation,
    MalformedTables,
    NotRefuted,
    NotSI,
    PreconditionViolation,
    TrivialAlgebra,
    UnboundVariable,
)
from .formula import (
    BOT,
    TOP,
    Const,
    Formula,
    Fuse,
    Impl,
    Join,
    Meet,
    Valuation,
    Var,
    evaluate,
    holds,
    mentions_bottom,
    parse,
    print_formula,
    sub_values,
    subformulas,
    variables,
)
from .verify import DEFAULT_FORMULA_SUITE, THEOREM_SUITES, load_formula_suite, run_suite

__version__ = "0.1.0"
