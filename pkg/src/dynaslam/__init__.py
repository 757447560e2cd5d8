"""UKF-SLAM in dynamic environments: filter, motion classifier, benchmark harness."""

from .dynamic_filter import (
    Classification,
    ClassifierParams,
    LandmarkTrack,
    MotionClassifier,
    Verdict,
    classify,
    compute_alpha,
    predicted_distance,
    step_filter,
)
from .geometry import Point2D, Pose2D, distance, wrap_angle
from .metrics import TrialResult, iae, summarize
from .runner import (
    CONVENTIONAL,
    PROPOSED,
    ExperimentSpec,
    MappingResult,
    ResultRow,
    run_experiment,
    run_mapping,
    run_trial,
)
from .scenario import (
    NoiseSigmas,
    Scenario,
    ScenarioConfig,
    SensorGeometry,
    TruthLog,
    drive,
    generate_scenario,
    moving_path,
    tsp_order,
)
from .sensing import SensorParams, noisy_control, sense
from .slam import (
    Control,
    CorrectionTrace,
    Measurement,
    NoiseParams,
    SlamState,
    augment,
    correct,
    motion_model,
    observation_model,
    predict,
    remove_landmark,
)
from .unscented import (
    GaussianState,
    SigmaSet,
    lambda_default,
    reconstruct,
    sigma_points,
    ut_weights,
)

__version__ = "0.1.0"

__all__ = [
    "Classification",
    "ClassifierParams",
    "LandmarkTrack",
    "MotionClassifier",
    "Verdict",
    "classify",
    "compute_alpha",
    "predicted_distance",
    "step_filter",
    "Point2D",
    "Pose2D",
    "distance",
    "wrap_angle",
    "TrialResult",
    "iae",
    "summarize",
    "CONVENTIONAL",
    "PROPOSED",
    "ExperimentSpec",
    "MappingResult",
    "ResultRow",
    "run_experiment",
    "run_mapping",
    "run_trial",
    "NoiseSigmas",
    "Scenario",
    "ScenarioConfig",
    "SensorGeometry",
    "TruthLog",
    "drive",
    "generate_scenario",
    "moving_path",
    "tsp_order",
    "SensorParams",
    "noisy_control",
    "sense",
    "Control",
    "CorrectionTrace",
    "Measurement",
    "NoiseParams",
    "SlamState",
    "augment",
    "correct",
    "motion_model",
    "observation_model",
    "predict",
    "remove_landmark",
    "GaussianState",
    "SigmaSet",
    "lambda_default",
    "reconstruct",
    "sigma_points",
    "ut_weights",
    "__version__",
]
