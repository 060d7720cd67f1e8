"""Completability analysis of low-rank matrix observation patterns.

The library decides, for a 0/1 observation mask and a target rank, what can
be said about the number of rank-r matrices agreeing with the observed
positions: exact partition-plus-linkage-support certificates for finite and
unique completability, a counting-based necessary test, randomized tangent
rank tests, and exact completion once a column space is known. Plucker
coordinates of subspaces and the sparse dual bases they support are exposed
as a small geometry toolkit of their own.
"""

__version__ = "0.1.0"

from .certificates import (
    Certificate,
    NecessaryConditionVerdict,
    RelaxedSlmfVerdict,
    SearchOutcome,
    SlmfWitness,
    VerificationResult,
    certificate_from_json,
    certificate_to_json,
    check_necessary_condition,
    check_relaxed_slmf,
    find_finite_certificate,
    find_unique_certificate,
    verify_certificate,
)
from .numerics import (
    DegenerateProjectionError,
    ExportedSystem,
    InconsistentObservationError,
    ObservedMatrix,
    RankReport,
    SectionTestError,
    complete_column,
    complete_matrix,
    export_plucker_system,
    grassmann_section_rank_test,
    jacobian_rank_test,
    numerical_rank,
    observed_from_csv,
    observed_to_csv,
    sample_generic_subspace,
)
from .patterns import (
    MinimumSizeCheck,
    ObservationPattern,
    PatternFormatError,
    column_subsets,
    load_pattern,
    minimum_size_check,
    parse_pattern,
    pattern_from_json,
    pattern_to_grid,
    pattern_to_json,
    random_pattern,
)
from .plucker import (
    BPhiTemplate,
    NotABasisError,
    PluckerVector,
    SectionFunctional,
    SubspaceBasis,
    build_bphi,
    dual_plucker,
    evaluate_bphi,
    evaluate_section,
    gr24_relation_residual,
    plucker_from_json,
    plucker_of_basis,
    plucker_to_json,
    projection_nondegenerate,
    projectively_equal,
    section_functional,
)
from .slmf import (
    Slmf,
    SlmfVerdict,
    check_slmf_combinatorial,
    check_slmf_randomized,
    slmf_from_grid,
    slmf_to_grid,
)

__all__ = [name for name in dir() if not name.startswith("_")]
