"""Linear-optics simulation of post-selected W- and GHZ-state expansion gates."""

from .fock import (
    H,
    OccupationVector,
    PhotonicState,
    Polarization,
    PostSelectPattern,
    QubitState,
    V,
    apply_beamsplitter,
    apply_bs_split,
    apply_create,
    apply_half_wave_ps,
    apply_pol_flip,
    apply_pol_rotation,
    encode_qubits,
    extract_qubits,
    fidelity,
    inner_product,
    make_fock,
    occ,
    post_select,
    tensor,
)
from .gates import (
    CascadePlan,
    GateResult,
    cascade,
    epr_pair,
    expand_w,
    ghz_plus2,
    ghz_target,
    t_w_plus2,
    w_target,
)

__version__ = "0.1.0"

__all__ = [
    "H",
    "OccupationVector",
    "PhotonicState",
    "Polarization",
    "PostSelectPattern",
    "QubitState",
    "V",
    "apply_beamsplitter",
    "apply_bs_split",
    "apply_create",
    "apply_half_wave_ps",
    "apply_pol_flip",
    "apply_pol_rotation",
    "encode_qubits",
    "extract_qubits",
    "fidelity",
    "inner_product",
    "make_fock",
    "occ",
    "post_select",
    "tensor",
    "CascadePlan",
    "GateResult",
    "cascade",
    "epr_pair",
    "expand_w",
    "ghz_plus2",
    "ghz_target",
    "t_w_plus2",
    "w_target",
]
