"""Spectral-gap and bottleneck analysis of quantum-enhanced MCMC on the
marked-state Gibbs sampling problem."""

from .model import (
    Config,
    DiagonalHamiltonian,
    GibbsMeasure,
    MarkedStateHamiltonian,
    critical_temperature,
    gibbs_measure,
    pi_min,
)
from .proposal import (
    AffineKernel,
    ColumnOracleKernel,
    DenseKernel,
    KernelCertificate,
    ProposalKernel,
    StructuredMarkedKernel,
    affine_combination,
    single_flip_kernel,
    uniform_kernel,
    validate_kernel,
)
from .quantum import (
    GroverClosedForm,
    MixerSpec,
    PropagatorConfig,
    apply_hamiltonian,
    basis_state,
    dense_hamiltonian,
    evolve,
    grover_closed_form,
    grover_mixer,
    quantum_kernel,
    quantum_proposal_column,
    resonance_field,
    structured_grover_kernel,
    transverse_field_mixer,
)
from .chain import (
    ChainState,
    TransitionMatrix,
    build_transition_matrix,
    chain_step,
    exact_mixing_time,
    make_chain,
    mh_acceptance,
    sample_chain,
    total_variation,
    tv_distance_curve,
)
from .spectral import (
    AveragingScheme,
    SpectralReport,
    TwoLevelReduction,
    averaged_grover_gap,
    grover_gap_closed_form,
    mixing_time_bounds,
    scaling_fit,
    spectral_gap_dense,
    time_averaged_kernel,
    two_level_reduction,
    uniform_gap_closed_form,
)
from .bottleneck import (
    BottleneckReport,
    bottleneck_bound,
    flow,
    marked_state_bound,
    min_bottleneck_exhaustive,
    sum_qa_certificate,
)
from . import errors

__all__ = [name for name in dir() if not name.startswith("_")]
