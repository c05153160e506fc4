"""Recursive Cartan factorization of special unitaries on qubit registers.

The package factors G in SU(2^n), n >= 3, into nested products of
(n-1)-qubit unitaries, single-qubit unitaries, and exponentials of
Abelian Cartan generators, plus one global phase. Splitting is exact up
to numerical optimization: each level takes the logarithm fixed by an
involutive automorphism (conjugation by I..IZ or I..IX), conjugates it
into the level's Cartan span, and peels the last qubit off the
residual factors; the sub-unitaries recurse.

Entry points: decompose_full for the whole recursion, decompose_one_level
for a single level, run_benchmark for Haar-random error statistics, and
the kgdecomp console command for file-based workflows.
"""

from .basis import KGBasis, PauliWord, build_kg_basis, order_cartan_basis, pauli_word
from .bch import BchConfig, solve_bch_split, split_Pk_Pm, truncated_bch
from .config import DEFAULT_TOLS, Tolerances
from .engine import (
    LevelResult,
    OptimizerConfig,
    StageResult,
    build_v,
    compute_m,
    decompose_full,
    decompose_one_level,
    extract_last_qubit,
    extract_subunitary,
    khk_stage,
    minimize_to_cartan,
    objective,
    phase_split,
    residual_k,
    secondary_m_pair,
)
from .errors import (
    BadLabelError,
    BranchAmbiguityWarning,
    DimensionMismatchError,
    KgDecompError,
    LevelExceedsRegisterError,
    NonOrthogonalBasisError,
    NotSkewHermitianError,
    NotTensorWithIdentityError,
    NotUnitaryError,
    OptimizerFailedError,
    OrderTooHighError,
    ParseError,
    RootSearchFailedError,
    SingularMatrixError,
    SubspaceViolationError,
)
from .factors import (
    DecompositionReport,
    Factor,
    FactorKind,
    FactorTree,
    deserialize,
    expand,
    factor_defects,
    make_tree,
    product,
    serialize,
)
from .involutions import AxisInvolution
from .linalg import (
    AlgebraElement,
    commutation_defect,
    eigenphase_mismatch,
    expm_skew,
    frobenius_norm,
    kron,
    logm_unitary,
    nearest_special_unitary,
    project_onto_span,
)
from .metrics import (
    BenchmarkResult,
    BenchmarkSummary,
    approx_error,
    format_table,
    haar_special_unitary,
    run_benchmark,
    subspace_error,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "AxisInvolution",
    "BadLabelError",
    "BchConfig",
    "BenchmarkResult",
    "BenchmarkSummary",
    "BranchAmbiguityWarning",
    "DecompositionReport",
    "DEFAULT_TOLS",
    "DimensionMismatchError",
    "Factor",
    "FactorKind",
    "FactorTree",
    "KGBasis",
    "KgDecompError",
    "LevelExceedsRegisterError",
    "LevelResult",
    "NonOrthogonalBasisError",
    "NotSkewHermitianError",
    "NotTensorWithIdentityError",
    "NotUnitaryError",
    "OptimizerConfig",
    "OptimizerFailedError",
    "OrderTooHighError",
    "ParseError",
    "PauliWord",
    "RootSearchFailedError",
    "SingularMatrixError",
    "StageResult",
    "SubspaceViolationError",
    "Tolerances",
    "approx_error",
    "build_kg_basis",
    "build_v",
    "commutation_defect",
    "compute_m",
    "decompose_full",
    "decompose_one_level",
    "deserialize",
    "eigenphase_mismatch",
    "expand",
    "expm_skew",
    "extract_last_qubit",
    "extract_subunitary",
    "factor_defects",
    "format_table",
    "frobenius_norm",
    "haar_special_unitary",
    "khk_stage",
    "kron",
    "logm_unitary",
    "make_tree",
    "minimize_to_cartan",
    "nearest_special_unitary",
    "objective",
    "order_cartan_basis",
    "pauli_word",
    "phase_split",
    "product",
    "project_onto_span",
    "residual_k",
    "run_benchmark",
    "secondary_m_pair",
    "serialize",
    "solve_bch_split",
    "split_Pk_Pm",
    "subspace_error",
    "truncated_bch",
]
