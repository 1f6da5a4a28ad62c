"""Simulator and verification harness for alignment-free transmission of
polarization entanglement.

The package evolves sparse N-photon states (polarization, time bin, output
path) through collective-rotation channels and passive or active
time-tag decoding circuits, and verifies the simulated fidelities and
success probabilities against closed-form expressions and an independent
dense reference engine.
"""

from .errors import (
    DegenerateStateError,
    DimensionError,
    EntangledRegisterError,
    ProtocolMisuseError,
    QtagError,
    SpecError,
    UsageError,
)
from .hilbert import (
    MODE_INDEX,
    MODES,
    BasisKet,
    ModeMap,
    Path,
    PhotonMode,
    Polarization,
    PureState,
    apply_single_photon_map,
    basis_ket,
    basis_state,
    fidelity_polarization,
    inner_product,
    is_normalized,
    norm_squared,
    normalize,
    project,
    zero_state,
)
from .optics import (
    active_decoder_map,
    pc_loss_factor,
    rotation_map,
    sigma_z_path1,
    tag_h,
    tag_v,
)
from .protocols import (
    PHI_MINUS,
    Branch,
    HeraldPattern,
    ProtocolSpec,
    SourceCoefficients,
    TransmissionOutcome,
    Variant,
    apply_channels,
    build_source,
    encode,
    herald_label,
    run_active,
    run_active_without_correction,
    run_passive_direct,
    run_passive_tagged,
    run_protocol,
)
from .analysis import (
    SweepGrid,
    SweepResult,
    VerifyReport,
    closed_form_f1,
    closed_form_f2,
    closed_form_loss,
    closed_form_p_active_branch,
    closed_form_p_passive,
    sweep,
    verify,
    verify_parameters,
)

__version__ = "0.1.0"
