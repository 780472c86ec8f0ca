"""State-space dynamic substructuring: coupling and decoupling of LTI models
through Lagrange multipliers, coupling forms, minimal-order reduction and
frequency-domain reference methods."""

from .compare import ComparisonResult, compare_frf, max_rel_error, rel_error
from .example import ExampleConfig, bench_inversions, build_example, oracle_frf
from .factory import (
    NoiseSpec,
    build_model,
    frequency_grid,
    negative_form,
    partition_interface_first,
    perturb_frf,
    similarity,
    synth_frf,
    to_acceleration,
    to_modal_form,
    to_velocity,
)
from .forms import (
    CouplingFormTransform,
    ncf_transform,
    reduce_minimal,
    sacf_transform,
    to_coupling_form,
    ucf_transform,
)
from .interface import (
    DofPair,
    InterfaceMap,
    InterfacePairing,
    StateReductionMap,
    boolean_pinv,
    build_mapping,
    build_state_reduction,
)
from .linalg import count_solves, interface_solve
from .lmsss import (
    CouplingProblem,
    couple,
    couple_accel,
    couple_disp,
    couple_vel,
    decouple,
    disp_feedthrough_closed_form,
    interface_forces_frf,
    retain_unique_dofs,
    stability_summary,
)
from .model import (
    DofLabel,
    FrfMatrix,
    LabelError,
    MechanicalSystem,
    ModelError,
    RankDeficiencyError,
    SingularInterfaceError,
    StateSpaceModel,
    SubstructuringError,
    validate_model,
    validate_system,
)
from .reference import (
    classical_couple,
    dynamic_stiffness,
    lmfbs_couple,
    lmfbs_decouple,
    sjovall_couple,
)

__version__ = "0.1.0"
