"""Two-photon interferometer simulator and CHSH analyzer."""

from .bell import (
    SETTING_LABELS,
    ChshSettings,
    HomPortProbabilities,
    PsiAngles,
    chsh,
    correlation_closed_form,
    correlation_from_table,
    correlation_via_table,
    hom_port_probabilities,
    table_for,
)
from .detection import (
    DEFAULT_ASSIGNMENT,
    DetectorModel,
    ImpossibleCountError,
    JointProbabilityTable,
    StationOutcome,
    ValueAssignment,
    apply_alpha_confusion,
    assigned_value,
    classify,
    closed_form_ideal_table,
    closed_form_lossy_table,
    joint_table,
)
from .fock import (
    DETECTED_MODES,
    FockState,
    ModeId,
    NotNormalizedError,
    OccupationVector,
    PhotonCapacityError,
    create,
    norm,
    probability_of,
    states_allclose,
    vacuum,
)
from .montecarlo import (
    EmptyEventsError,
    EventBatch,
    EventRecord,
    MissingSettingError,
    MixedSettingsError,
    SamplerConfig,
    estimate_chsh,
    estimate_correlation,
    sample_events,
)
from .optics import (
    ExperimentConfig,
    ModeTransform,
    UnknownModeError,
    apply,
    beamsplitter_5050,
    build_experiment_state,
    loss_channel,
    polarizer_rotation,
)
from .optimize import (
    NoConvergenceError,
    NoViolationError,
    OptimizationResult,
    ThresholdResult,
    critical_efficiency,
    maximize_chsh,
)

__version__ = "0.1.0"
