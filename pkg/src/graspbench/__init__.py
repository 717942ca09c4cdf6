"""Benchmark scoring and deterministic handover replay for
container-property estimation challenges."""

from .baselines import (
    BaselineSpec,
    average_baseline,
    fill_missing_tasks,
    random_baseline,
)
from .io import (
    ParseError,
    load_annotations,
    load_pose_track,
    load_pose_tracks,
    load_predictions,
    save_annotations,
    save_pose_track,
    save_predictions,
)
from .model import (
    Category,
    ConfigurationAnnotation,
    DensityTable,
    FillLevel,
    FillType,
    PoseTrack,
    PredictionRecord,
    PredictionSet,
    Split,
    build_density_table,
    select_split,
)
from .poses import interpolate_pose, slerp
from .scoring import (
    BASE_WEIGHTS,
    ClassMetrics,
    PerConfigScore,
    ScoreReport,
    ScoringError,
    capacity_dimensions_score,
    dimension_accuracy,
    evaluate,
    filling_mass,
    filling_mass_error,
    joint_filling_score,
    overall_score,
    predicted_filling_mass,
    predicted_object_mass,
    relative_error,
    task_score,
    weighted_f1,
)
from .simulator import (
    Calibration,
    HandoverOutcome,
    SimParams,
    SimulationError,
    SimulationResult,
    calibrate,
    delivery_accuracy,
    grasp_force,
    object_safety,
    run_handover,
    safety_and_delivery_scores,
    simulate_handovers,
    tip_over_angle,
)
from .synth import perfect_predictions, synthetic_annotations, write_synthetic_dataset

__version__ = "0.1.0"
