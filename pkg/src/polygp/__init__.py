"""Certified lower bounds for multivariate polynomials via geometric programming."""

from .polynomial import (
    DecompositionView,
    ExponentVector,
    ParseError,
    SparsePolynomial,
    decompose,
    evaluate,
    homogenize,
    parse_polynomial,
    render,
    substitute_last,
)
from .certificates import (
    AWitness,
    BinomialSquare,
    CertificateError,
    SobsCertificate,
    WitnessError,
    agiform_certificate,
    check_fk,
    check_fk_improved,
    check_lasserre,
    check_newcrt,
    check_suffcnd,
    expand_certificate,
    expand_certificate_exact,
    extend_witness_to_homogenization,
    fk_equivalence_check,
    hurwitz_reznick_certificate,
    suffcnd_certificate,
)
from .gpsolver import (
    GeometricProgram,
    GpSolution,
    GpSolverError,
    GpStatus,
    LogMonomialTerm,
    SolverOptions,
    check_feasible,
    evaluate_posynomial,
    solve,
)
from .bounds import (
    BoundPreconditionError,
    BoundResult,
    MinusInfinityVerdict,
    apply_diagonal_shift,
    bound_rdmt,
    bound_rfk,
    bound_rl,
    compute_fgp,
    fgp_program,
    positive_root,
    rdmt_feasible_point,
    rfk_feasible_point,
    rl_feasible_point,
)
from .oracle import SearchBudget, estimate_global_min, gradient

__version__ = "0.1.0"

__all__ = [
    "AWitness",
    "BinomialSquare",
    "BoundPreconditionError",
    "BoundResult",
    "CertificateError",
    "DecompositionView",
    "ExponentVector",
    "GeometricProgram",
    "GpSolution",
    "GpSolverError",
    "GpStatus",
    "LogMonomialTerm",
    "MinusInfinityVerdict",
    "ParseError",
    "SearchBudget",
    "SobsCertificate",
    "SolverOptions",
    "SparsePolynomial",
    "WitnessError",
    "agiform_certificate",
    "apply_diagonal_shift",
    "bound_rdmt",
    "bound_rfk",
    "bound_rl",
    "check_feasible",
    "check_fk",
    "check_fk_improved",
    "check_lasserre",
    "check_newcrt",
    "check_suffcnd",
    "compute_fgp",
    "decompose",
    "estimate_global_min",
    "evaluate",
    "evaluate_posynomial",
    "expand_certificate",
    "expand_certificate_exact",
    "extend_witness_to_homogenization",
    "fgp_program",
    "fk_equivalence_check",
    "gradient",
    "homogenize",
    "hurwitz_reznick_certificate",
    "parse_polynomial",
    "positive_root",
    "rdmt_feasible_point",
    "render",
    "rfk_feasible_point",
    "rl_feasible_point",
    "solve",
    "substitute_last",
    "suffcnd_certificate",
]
