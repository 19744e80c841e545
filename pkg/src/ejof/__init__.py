"""Effective Lindbladians for perturbed open systems with a DFS.

The package computes the second-order effective generator governing dynamics
inside a decoherence-free subspace, by an exact resolvent formula and by a
closed effective-operator form, and provides scenario constructions, a
continuous-error-correction robustness suite, and dynamics validation.
"""

from .operators import (
    Corners,
    DfsProjector,
    adjoint_superop,
    anticommutator_superop,
    apply_superop,
    choi_matrix,
    commutator_superop,
    compress_superop,
    dagger,
    devectorize,
    dissipator,
    four_corners,
    frob,
    kraus_operators,
    sandwich_superop,
    star_commutator,
    star_commutator_superop,
    trace_distance,
    vectorize,
)
from .lindblad import (
    NonSemisimpleZeroError,
    SingularBlockError,
    SpectralGapWarning,
    StructureError,
    StructuredLindbladian,
    StructureReport,
    assemble_lindbladian,
    asymptotic_projection,
    asymptotic_projection_analytic,
    asymptotic_projection_limit,
    decay_rates,
    drazin_inverse,
    matrix_exp_apply,
    min_decay_rate,
    nh_hamiltonian,
    nh_hamiltonian_inverse,
    nh_superop_inverse_lr,
    nh_superop_solve,
    structure_report,
    structured_lindbladian,
)
from .effective import (
    EffectiveGenerator,
    EquivalenceReport,
    IdentityReport,
    CornerSensitivityReport,
    Perturbation,
    corner_sensitivity,
    dfs_block,
    effective_coupling,
    effective_lindbladian_closed,
    effective_lindbladian_general,
    effective_to_superop,
    identity_suite,
    perturbation_superops,
    perturbed_superop,
    random_structured_instance,
    verify_equivalence,
)
from .scenarios import (
    CancellationReport,
    ThreeLevelParams,
    cancellation_check,
    coherent_cancellation_drive,
    generalized_three_level_perturbation,
    orthogonality_residual,
    pauli_lowering_targets,
    random_orthogonal_family,
    random_surjective_jump,
    surjectivity_residual,
    three_level_system,
    universal_dissipation,
)
from .qec import (
    MiscalibrationEntry,
    ObstructionTable,
    RecoveryChannel,
    RobustnessReport,
    check_recovery_conditions,
    classify_miscalibration,
    correctability_check,
    hamiltonian_obstruction_demo,
    pauli_miscalibration,
    pauli_on_qubit,
    repetition_code_recovery,
    robustness_check,
)
from .dynamics import (
    ConvergenceFit,
    SweepCell,
    SweepConfig,
    SweepTable,
    convergence_order,
    drift_constants,
    evolve_and_compare,
    validate_initial_state,
)

__version__ = "0.1.0"
