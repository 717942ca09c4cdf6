"""Deterministic quasi-static replay of annotated human-to-robot handovers.

The replay follows the recorded protocol without a physics engine: the end
effector chases the annotated container trajectory from the handover frame
at a fixed speed, the gripper closes to a fixed margin below the object
width, the grasp force follows the predicted object mass, and a threshold
rule on the applied/required force ratio decides between drop, slip,
secure, and break. Slip shifts and tilts the placement linearly in the
force deficit; a secure grasp delivers exactly on target. Every step is a
pure function of its inputs, so repeated runs are bit-identical, and
feeding the true mass reproduces a perfect handover by construction.

To remove the remaining model bias from the two handover scores, a
calibration pass replays every configuration with its true mass first:
configurations that fail even then are discarded, and the per-score
residual against a perfect result is added back (zero for this model, kept
for parity with externally produced outcomes).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from .model import ConfigurationAnnotation, PoseTrack
from .poses import interpolate_pose

TraceRow = tuple[str, int, float, float, float, str]


class SimulationError(Exception):
    """Raised when a handover cannot be simulated from the given inputs."""


@dataclass(frozen=True)
class SimParams:
    """Tunable constants of the handover replay.

    Lengths are in mm and speeds in m/s to match the annotation units;
    masses are converted to kg where forces are computed.
    """

    gravity: float = 9.81  # m/s^2
    max_acceleration: float = 2.0  # arm acceleration bound, m/s^2
    friction: float = 1.0  # container/gripper friction coefficient
    safety_sensitivity: float = 0.9  # grasp-force tolerance shaping, in (0, 1)
    max_target_distance_mm: float = 50.0  # delivery counts only inside this radius
    tip_over_override_rad: float | None = None  # fixed tip-over angle when set
    ee_speed_mps: float = 1.0
    reach_tolerance_mm: float = 10.0
    hold_after_end_s: float = 2.0  # last pose is held this long past the track
    grip_margin_mm: float = 20.0  # gripper closes this far below object width
    slip_threshold: float = 0.5  # force ratio below which the object drops
    slip_length_mm: float = 50.0  # placement shift at a force ratio of 0
    break_ratio: float = 3.0  # force ratio above which the object breaks
    home_mm: tuple[float, float, float] = (0.0, 0.0, 0.0)
    target_mm: tuple[float, float, float] | None = None  # overrides annotations

    def __post_init__(self) -> None:
        positive = {
            "gravity": self.gravity,
            "friction": self.friction,
            "max_target_distance_mm": self.max_target_distance_mm,
            "ee_speed_mps": self.ee_speed_mps,
            "reach_tolerance_mm": self.reach_tolerance_mm,
            "grip_margin_mm": self.grip_margin_mm,
            "slip_threshold": self.slip_threshold,
            "slip_length_mm": self.slip_length_mm,
            "break_ratio": self.break_ratio,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_acceleration < 0 or self.hold_after_end_s < 0:
            raise ValueError("max_acceleration and hold_after_end_s must be >= 0")
        if not 0.0 < self.safety_sensitivity < 1.0:
            raise ValueError("safety_sensitivity must lie strictly in (0, 1)")
        if self.tip_over_override_rad is not None and self.tip_over_override_rad <= 0:
            raise ValueError("tip_over_override_rad must be positive")


@dataclass(frozen=True)
class HandoverOutcome:
    """Result of replaying one configuration.

    place_offset_mm and tilt_rad are None when the container never made it
    to a placement (not reached, dropped, broken, or mass not estimated).
    """

    config_id: str
    mass_estimated: bool
    reached: bool
    grasped: bool
    applied_force_n: float
    required_force_n: float
    safety: float
    dropped: bool
    broken: bool
    place_offset_mm: float | None
    tilt_rad: float | None
    delivery: float
    discarded: bool = False


@dataclass(frozen=True)
class Calibration:
    """Ground-truth replay results used to debias the handover scores."""

    discarded: frozenset[str]
    residual_safety: float  # percent
    residual_delivery: float  # percent
    outcomes: tuple[HandoverOutcome, ...]


@dataclass(frozen=True)
class SimulationResult:
    outcomes: tuple[HandoverOutcome, ...]
    calibration: Calibration
    safety_score: float  # percent
    delivery_score: float  # percent

    def to_dict(self, params: SimParams) -> dict:
        def outcome_row(o: HandoverOutcome) -> dict:
            return {
                "config_id": o.config_id,
                "mass_estimated": o.mass_estimated,
                "reached": o.reached,
                "grasped": o.grasped,
                "applied_force_n": round(o.applied_force_n, 6),
                "required_force_n": round(o.required_force_n, 6),
                "safety": round(o.safety, 6),
                "dropped": o.dropped,
                "broken": o.broken,
                "place_offset_mm": None if o.place_offset_mm is None
                else round(o.place_offset_mm, 6),
                "tilt_rad": None if o.tilt_rad is None else round(o.tilt_rad, 6),
                "delivery": round(o.delivery, 6),
            }

        return {
            "params": asdict(params),
            "discarded": sorted(self.calibration.discarded),
            "residuals": {
                "safety": round(self.calibration.residual_safety, 6),
                "delivery": round(self.calibration.residual_delivery, 6),
            },
            "safety_score": round(self.safety_score, 6),
            "delivery_score": round(self.delivery_score, 6),
            "outcomes": [outcome_row(o) for o in self.outcomes],
        }


def grasp_force(mass_kg: float, params: SimParams) -> float:
    """Force in N needed to hold a mass against gravity plus arm acceleration."""
    if mass_kg < 0:
        raise ValueError("mass must be non-negative")
    return mass_kg * (params.gravity + params.max_acceleration) / params.friction


def object_safety(applied_n: float, required_n: float, sensitivity: float) -> float:
    """Probability-like score for holding the object without drop or damage.

    (1 - sensitivity) raised to the relative force gap: exactly 1 when the
    applied force matches the required force, decaying exponentially and
    symmetrically in the gap.
    """
    if required_n <= 0:
        raise ValueError("required force must be strictly positive")
    if not 0.0 < sensitivity < 1.0:
        raise ValueError("sensitivity must lie strictly in (0, 1)")
    gap = abs(applied_n - required_n) / required_n
    return (1.0 - sensitivity) ** gap


def delivery_accuracy(offset_mm: float, tilt_rad: float,
                      max_distance_mm: float, tip_angle_rad: float) -> float:
    """Score for placing the container upright and near the target.

    Linear in the distance to the target, zero once the offset reaches the
    allowed radius or the tilt reaches the tip-over angle.
    """
    if max_distance_mm <= 0 or tip_angle_rad <= 0:
        raise ValueError("max distance and tip-over angle must be positive")
    if offset_mm < max_distance_mm and tilt_rad < tip_angle_rad:
        return 1.0 - offset_mm / max_distance_mm
    return 0.0


def tip_over_angle(width_bottom_mm: float, height_mm: float) -> float:
    """Tilt in radians at which a uniform container pivots over its base edge."""
    if width_bottom_mm <= 0 or height_mm <= 0:
        raise ValueError("width and height must be positive")
    return math.atan(width_bottom_mm / height_mm)


def _tip_angle_for(ann: ConfigurationAnnotation, params: SimParams) -> float:
    if params.tip_over_override_rad is not None:
        return params.tip_over_override_rad
    return tip_over_angle(ann.width_bottom_mm, ann.height_mm)


def _approach(ann: ConfigurationAnnotation, track: PoseTrack, params: SimParams,
              trace: list[TraceRow] | None) -> tuple[bool, int, np.ndarray]:
    """Chase the container from the handover frame; returns (reached, frame, ee)."""
    fps = ann.fps
    step_mm = params.ee_speed_mps * 1000.0 / fps
    hold_frames = int(round(params.hold_after_end_s * fps))
    last = track.frames[-1]
    start = max(ann.handover_frame, track.frames[0])
    ee = np.asarray(params.home_mm, dtype=float)
    frame = start
    for frame in range(start, last + hold_frames + 1):
        obj, _ = interpolate_pose(track, frame)
        gap = float(np.linalg.norm(obj - ee))
        if gap <= params.reach_tolerance_mm:
            return True, frame, ee
        ee = ee + (obj - ee) * (min(step_mm, gap) / gap)
        if trace is not None:
            trace.append((ann.config_id, frame, float(ee[0]), float(ee[1]),
                          float(ee[2]), "approach"))
    return False, frame, ee


def _deliver_trace(ann: ConfigurationAnnotation, params: SimParams,
                   start_frame: int, ee: np.ndarray,
                   trace: list[TraceRow], state: str) -> None:
    target = np.asarray(params.target_mm or ann.target_mm, dtype=float)
    step_mm = params.ee_speed_mps * 1000.0 / ann.fps
    frame = start_frame
    while True:
        gap = float(np.linalg.norm(target - ee))
        if gap <= 1e-9:
            break
        ee = ee + (target - ee) * (min(step_mm, gap) / gap)
        frame += 1
        trace.append((ann.config_id, frame, float(ee[0]), float(ee[1]),
                      float(ee[2]), "deliver"))
    trace.append((ann.config_id, frame + 1, float(ee[0]), float(ee[1]),
                  float(ee[2]), state))


def run_handover(ann: ConfigurationAnnotation, track: PoseTrack,
                 predicted_mass_g: float | None, params: SimParams,
                 trace: list[TraceRow] | None = None) -> HandoverOutcome:
    """Replay one handover with the given predicted object mass in grams.

    A None mass marks the configuration as not estimated: the replay still
    reports reachability but scores zero safety and delivery.
    """
    if track is None:
        raise SimulationError(f"missing pose track for configuration "
                              f"'{ann.config_id}'")
    reached, reach_frame, ee = _approach(ann, track, params, trace)
    aperture_mm = ann.grasp_width_mm - params.grip_margin_mm
    grasped = reached and aperture_mm > 0
    required_n = grasp_force(ann.object_mass_g / 1000.0, params)

    if predicted_mass_g is None:
        return HandoverOutcome(
            config_id=ann.config_id, mass_estimated=False, reached=reached,
            grasped=grasped, applied_force_n=0.0, required_force_n=required_n,
            safety=0.0, dropped=False, broken=False, place_offset_mm=None,
            tilt_rad=None, delivery=0.0,
        )

    applied_n = grasp_force(predicted_mass_g / 1000.0, params)
    safety = object_safety(applied_n, required_n, params.safety_sensitivity)

    dropped = broken = False
    offset_mm: float | None = None
    tilt_rad: float | None = None
    delivery = 0.0
    if grasped:
        tip_rad = _tip_angle_for(ann, params)
        ratio = applied_n / required_n
        if ratio < params.slip_threshold:
            dropped = True
        elif ratio > params.break_ratio:
            broken = True
        else:
            if ratio < 1.0:
                # Partial slip: placement shifts and tilts with the deficit.
                offset_mm = (1.0 - ratio) * params.slip_length_mm
                tilt_rad = (1.0 - ratio) * tip_rad
            else:
                offset_mm = 0.0
                tilt_rad = 0.0
            delivery = delivery_accuracy(offset_mm, tilt_rad,
                                         params.max_target_distance_mm, tip_rad)
            if trace is not None:
                state = "placed" if delivery > 0 else "missed"
                _deliver_trace(ann, params, reach_frame, ee, trace, state)
        if trace is not None and (dropped or broken):
            trace.append((ann.config_id, reach_frame, float(ee[0]), float(ee[1]),
                          float(ee[2]), "dropped" if dropped else "broken"))

    return HandoverOutcome(
        config_id=ann.config_id, mass_estimated=True, reached=reached,
        grasped=grasped, applied_force_n=applied_n, required_force_n=required_n,
        safety=safety, dropped=dropped, broken=broken,
        place_offset_mm=offset_mm, tilt_rad=tilt_rad, delivery=delivery,
    )


def _run_many(annotations: Sequence[ConfigurationAnnotation],
              tracks: Mapping[str, PoseTrack],
              masses: Mapping[str, float | None],
              params: SimParams, jobs: int,
              trace: list[TraceRow] | None) -> list[HandoverOutcome]:
    def one(ann: ConfigurationAnnotation) -> tuple[HandoverOutcome, list[TraceRow]]:
        local_trace: list[TraceRow] | None = [] if trace is not None else None
        outcome = run_handover(ann, tracks.get(ann.config_id),
                               masses.get(ann.config_id), params, local_trace)
        return outcome, local_trace or []

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, annotations))
    else:
        results = [one(ann) for ann in annotations]
    outcomes = []
    for outcome, rows in results:
        outcomes.append(outcome)
        if trace is not None:
            trace.extend(rows)
    return outcomes


def calibrate(annotations: Sequence[ConfigurationAnnotation],
              tracks: Mapping[str, PoseTrack],
              params: SimParams, jobs: int = 1) -> Calibration:
    """Replay every configuration with its true mass.

    Configurations that fail to grasp or deliver even with the truth are
    discarded; the residuals are the per-score gaps to a perfect result
    over the remaining configurations, in percent.
    """
    ordered = sorted(annotations, key=lambda a: a.config_id)
    masses = {a.config_id: a.object_mass_g for a in ordered}
    outcomes = _run_many(ordered, tracks, masses, params, jobs, None)
    discarded = frozenset(
        o.config_id for o in outcomes
        if not o.reached or not o.grasped or o.dropped or o.broken
        or o.delivery <= 0.0
    )
    kept = [o for o in outcomes if o.config_id not in discarded]
    if kept:
        residual_safety = 100.0 - 100.0 * sum(o.safety for o in kept) / len(kept)
        residual_delivery = 100.0 - 100.0 * sum(o.delivery for o in kept) / len(kept)
    else:
        residual_safety = residual_delivery = 0.0
    return Calibration(
        discarded=discarded,
        residual_safety=residual_safety,
        residual_delivery=residual_delivery,
        outcomes=tuple(outcomes),
    )


def safety_and_delivery_scores(outcomes: Sequence[HandoverOutcome],
                               residual_safety: float = 0.0,
                               residual_delivery: float = 0.0,
                               ) -> tuple[float, float]:
    """Mean safety (gated on estimated masses) and delivery, in percent.

    The calibration residuals are added and the results clamped to
    [0, 100]. The caller passes only non-discarded outcomes.
    """
    ordered = sorted(outcomes, key=lambda o: o.config_id)
    if not ordered:
        raise SimulationError("no configurations left to score")
    count = len(ordered)
    safety = 100.0 * sum(o.safety if o.mass_estimated else 0.0
                         for o in ordered) / count
    delivery = 100.0 * sum(o.delivery for o in ordered) / count
    clamp = lambda v: min(100.0, max(0.0, v))
    return clamp(safety + residual_safety), clamp(delivery + residual_delivery)


def simulate_handovers(annotations: Sequence[ConfigurationAnnotation],
                       tracks: Mapping[str, PoseTrack],
                       masses: Mapping[str, float | None],
                       params: SimParams, jobs: int = 1,
                       trace: list[TraceRow] | None = None) -> SimulationResult:
    """Calibrate on ground truth, then replay with the predicted masses."""
    ordered = sorted(annotations, key=lambda a: a.config_id)
    calibration = calibrate(ordered, tracks, params, jobs=jobs)
    kept = [a for a in ordered if a.config_id not in calibration.discarded]
    if not kept:
        raise SimulationError("every configuration was discarded during calibration")
    outcomes = _run_many(kept, tracks, masses, params, jobs, trace)
    safety, delivery = safety_and_delivery_scores(
        outcomes, calibration.residual_safety, calibration.residual_delivery)
    return SimulationResult(
        outcomes=tuple(outcomes),
        calibration=calibration,
        safety_score=safety,
        delivery_score=delivery,
    )
