"""Recovery of periodic sources in linear dynamical systems from space-time samples."""

__version__ = "0.1.0"

from .dft import dft, fourier_block_apply, fourier_matrix, idft
from .frames import (
    DualFrameFamily,
    EquivalenceViolationError,
    FrameCertificate,
    NotAFrameError,
    bessel_bound,
    canonical_dual,
    certify,
    dual_family,
    frame_bounds,
    projected_system,
)
from .linalg import (
    Subspace,
    Tolerances,
    hermitian_eigenrange,
    inner,
    orthonormalize,
    project,
    solve,
    spectral_norm,
)
from .recovery import (
    CertificateFailedError,
    NonIdentifiableError,
    WitnessUnavailableError,
    ambiguity_witness,
    apply_Q,
    apply_R,
    op_norm_l2_linf,
    oracle_least_squares,
    residue_limits,
)
from .system import (
    NotContractiveError,
    SampleMatrix,
    SystemInstance,
    TooFewRowsError,
    build_resolvents,
    closed_form_state,
    generate_samples,
    periodic_solution,
    random_instance,
    random_source,
    simulate,
    tail_constant,
)

