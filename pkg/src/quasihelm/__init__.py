"""Matrix-free spectral solver for quasiperiodic Helmholtz eigenproblems.

1D/2D quasiperiodic coefficients are lifted to 2D/4D periodic tori through a
cut-and-project geometry, the embedded generalized eigenproblem is solved
with a Fourier-pseudospectral discretization (diagonal stiffness, FFT
convolution mass), and eigenpairs are mapped back to physical space where
weighted pointwise Rayleigh quotients validate them.
"""

from .coefficients import (
    ExpTrigCoefficient,
    FourierCoefficientGrid,
    FourierPolyCoefficient,
    PeriodicCoefficient,
    ShellSpectrum,
    TanhSmoothedCoefficient,
    TrigPolynomial,
    TwoPhaseCoefficient,
    coefficient_from_config,
    sample_to_fourier,
    shell_rms,
    tanh_smooth,
)
from .eigensolve import SolverConfig, SpectralEigenpair, branch_overlap, solve_embedded
from .errors import (
    ApproximantTooFine,
    ConfigError,
    ConvergenceFailure,
    EmptyEstimator,
    EmptyPencil,
    InvalidArgument,
    InvalidCoefficient,
    NearSingularCoalesce,
    QuasihelmError,
    SingularGeometry,
)
from .lattice import (
    FourierIndexSet,
    PhysicalSamplingGrid,
    ProjectionGeometry,
    build_index_set,
    lift_wavevector,
    named_geometry,
    project_point,
    rational_independence_diagnostic,
)
from .operator import MassOperator, StiffnessDiagonal, assemble_stiffness, deflation_report
from .reconstruct import ReconstructedField, field_magnitude_snapshot, reconstruct_field
from .rq_validate import (
    FDOperatorPair,
    PointwiseRQSet,
    RQEstimate,
    build_fd_pair,
    estimate,
    pointwise_rqs,
    residual_bound_check,
    rq_error,
    weighted_expectation,
    weighted_std,
)
from .supercell import (
    FoldedBandSet,
    RationalApproximant,
    SupercellModel,
    band_path,
    build_supercell,
    convergents,
    folded_bands,
    lifted_path,
    rationalize_geometry,
)
from .transfer_diag import (
    RatioSequence,
    ScalarSymplecticPair,
    coalesce,
    coalesce_chain,
    ratio_sequence_from_field,
    ratio_sequence_from_recurrence,
    recurrence_pairs,
    stability_report,
)

__version__ = "0.1.0"
