"""Simulator and verification library for controlled remote state
preparation over pure three-qubit channels."""

from .errors import (
    ChannelNotControllableError,
    CrspError,
    DegenerateSchmidtError,
    DegenerateTargetError,
    DimensionMismatchError,
    DuplicateWireError,
    InvalidCoefficientsError,
    NoCorrectionExistsError,
    NotNormalizedError,
    NotRealCoefficientsError,
    UnknownWireError,
    WireMismatchError,
)
from .canonical import (
    CanonicalThreeQubit,
    canonical_state,
    decompose,
    load_channel,
    save_channel,
    verify_canonical,
)
from .optimizer import (
    Landscape,
    Optimum,
    landscape_to_csv,
    maximize,
    save_landscape,
    success_value,
    sweep,
)
from .protocols import (
    BranchRecord,
    CoefficientClass,
    ControllerSetting,
    ProtocolReport,
    TargetQubit,
    TargetTwoQubit,
    bell_pair,
    charlie_basis,
    classify,
    report_to_dict,
    report_violations,
    run_crsp_single,
    run_crsp_two,
)
from .qcore import (
    LocalOperator,
    MeasurementBasis,
    MeasurementOutcome,
    PureState,
    SchmidtPair,
    apply_local,
    basis_state,
    bipartite_schmidt,
    computational_basis,
    fidelity,
    haar_random_state,
    load_state,
    measure,
    reorder,
    save_state,
    tensor,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"
