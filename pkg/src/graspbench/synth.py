"""Deterministic synthetic dataset for demos and tests.

The real recordings behind this benchmark are not redistributable, so the
package ships a generator that writes a small, fully self-consistent
dataset in the documented file formats: fifteen containers split across
train / public-test / private-test, four configurations each, pose tracks
with one keyframe every ten frames, and an optional configuration whose
container stays out of the robot's reach (useful to exercise calibration
discards).

Densities are constant per filling type (pasta 0.70, rice 0.85, water 1.0
g/mL), so a density table built from the training split reproduces every
filling mass exactly and perfect predictions score 100 everywhere.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .io import save_annotations, save_pose_track, save_predictions
from .model import (
    Category,
    ConfigurationAnnotation,
    FillLevel,
    FillType,
    PoseTrack,
    PredictionRecord,
    PredictionSet,
    Split,
)

PASTA_DENSITY = 0.70
RICE_DENSITY = 0.85
_DENSITY = {FillType.PASTA: PASTA_DENSITY, FillType.RICE: RICE_DENSITY,
            FillType.WATER: 1.0}

# (container_id, category, capacity mL, mass g, width top, width bottom,
#  height mm, split)
_CONTAINERS = [
    ("tr-cup-01", Category.CUP, 250.0, 45.0, 80.0, 55.0, 95.0, Split.TRAIN),
    ("tr-cup-02", Category.CUP, 300.0, 52.0, 85.0, 58.0, 100.0, Split.TRAIN),
    ("tr-cup-03", Category.CUP, 350.0, 60.0, 90.0, 60.0, 105.0, Split.TRAIN),
    ("tr-gls-01", Category.DRINKING_GLASS, 400.0, 180.0, 75.0, 65.0, 140.0,
     Split.TRAIN),
    ("tr-gls-02", Category.DRINKING_GLASS, 450.0, 200.0, 78.0, 68.0, 150.0,
     Split.TRAIN),
    ("tr-gls-03", Category.DRINKING_GLASS, 500.0, 220.0, 80.0, 70.0, 160.0,
     Split.TRAIN),
    ("tr-box-01", Category.FOOD_BOX, 800.0, 120.0, 110.0, 110.0, 180.0,
     Split.TRAIN),
    ("tr-box-02", Category.FOOD_BOX, 900.0, 130.0, 115.0, 115.0, 190.0,
     Split.TRAIN),
    ("tr-box-03", Category.FOOD_BOX, 1000.0, 140.0, 120.0, 120.0, 200.0,
     Split.TRAIN),
    ("pu-cup-01", Category.CUP, 320.0, 55.0, 86.0, 59.0, 102.0,
     Split.PUBLIC_TEST),
    ("pu-gls-01", Category.DRINKING_GLASS, 420.0, 190.0, 76.0, 66.0, 145.0,
     Split.PUBLIC_TEST),
    ("pu-box-01", Category.FOOD_BOX, 850.0, 125.0, 112.0, 112.0, 185.0,
     Split.PUBLIC_TEST),
    ("pr-cup-01", Category.CUP, 280.0, 50.0, 83.0, 57.0, 98.0,
     Split.PRIVATE_TEST),
    ("pr-gls-01", Category.DRINKING_GLASS, 480.0, 210.0, 79.0, 69.0, 155.0,
     Split.PRIVATE_TEST),
    ("pr-box-01", Category.FOOD_BOX, 950.0, 135.0, 118.0, 118.0, 195.0,
     Split.PRIVATE_TEST),
]

_FILLINGS = [
    (FillType.NONE, FillLevel.EMPTY),
    (FillType.PASTA, FillLevel.HALF),
    (FillType.RICE, FillLevel.FULL),
    (FillType.WATER, FillLevel.HALF),
]

FPS = 30.0
HANDOVER_FRAME = 60
TARGET_MM = (250.0, -250.0, 20.0)
_IDENTITY_QUAT = (0.0, 0.0, 0.0, 1.0)


def _pose_track(start_xy: tuple[float, float]) -> PoseTrack:
    """Keyframes every 10 frames: glide to the handover point, then hold."""
    handover_point = np.array([300.0, 0.0, 150.0])
    start = np.array([start_xy[0], start_xy[1], 150.0])
    frames = tuple(range(0, 100, 10))
    translations = []
    for frame in frames:
        u = min(frame, HANDOVER_FRAME) / HANDOVER_FRAME
        translations.append(start + u * (handover_point - start))
    rotations = np.tile(np.array(_IDENTITY_QUAT), (len(frames), 1))
    return PoseTrack(frames=frames,
                     translations=np.array(translations),
                     rotations=rotations)


def _unreachable_track() -> PoseTrack:
    """Container parked far outside the robot's reach for the whole take."""
    frames = (0, 90)
    translations = np.array([[5000.0, 5000.0, 150.0], [5000.0, 5000.0, 150.0]])
    rotations = np.tile(np.array(_IDENTITY_QUAT), (2, 1))
    return PoseTrack(frames=frames, translations=translations,
                     rotations=rotations)


def synthetic_annotations(include_unreachable: bool = False,
                          ) -> list[ConfigurationAnnotation]:
    """In-memory synthetic annotations (pose paths point into poses/)."""
    annotations = []
    for container_id, category, capacity, mass, wt, wb, h, split in _CONTAINERS:
        for index, (fill_type, fill_level) in enumerate(_FILLINGS, start=1):
            config_id = f"{container_id}-c{index:02d}"
            fill_mass = (fill_level.fraction * capacity * _DENSITY[fill_type]
                         if fill_type is not FillType.NONE else 0.0)
            annotations.append(ConfigurationAnnotation(
                config_id=config_id,
                container_id=container_id,
                category=category,
                capacity_ml=capacity,
                container_mass_g=mass,
                width_top_mm=wt,
                width_bottom_mm=wb,
                height_mm=h,
                fill_type=fill_type,
                fill_level=fill_level,
                fill_mass_g=fill_mass,
                handover_frame=HANDOVER_FRAME,
                fps=FPS,
                pose_path=f"poses/{config_id}.csv",
                target_mm=TARGET_MM,
                split=split,
            ))
    if include_unreachable:
        annotations.append(ConfigurationAnnotation(
            config_id="pu-far-01-c01",
            container_id="pu-far-01",
            category=Category.FOOD_BOX,
            capacity_ml=700.0,
            container_mass_g=110.0,
            width_top_mm=105.0,
            width_bottom_mm=105.0,
            height_mm=170.0,
            fill_type=FillType.WATER,
            fill_level=FillLevel.HALF,
            fill_mass_g=350.0,
            handover_frame=90,
            fps=FPS,
            pose_path="poses/pu-far-01-c01.csv",
            target_mm=TARGET_MM,
            split=Split.PUBLIC_TEST,
        ))
    return annotations


def perfect_predictions(annotations, algorithm: str = "perfect") -> PredictionSet:
    """Predictions that copy the annotated values exactly."""
    records = tuple(
        PredictionRecord(
            config_id=a.config_id,
            fill_level=a.fill_level,
            fill_type=a.fill_type,
            capacity_ml=a.capacity_ml,
            container_mass_g=a.container_mass_g,
            width_top_mm=a.width_top_mm,
            width_bottom_mm=a.width_bottom_mm,
            height_mm=a.height_mm,
        )
        for a in annotations
    )
    return PredictionSet(algorithm=algorithm, records=records)


def write_synthetic_dataset(root, include_unreachable: bool = False,
                            with_perfect_predictions: bool = True) -> dict:
    """Write the synthetic dataset under root; returns the file layout."""
    root = Path(root)
    (root / "poses").mkdir(parents=True, exist_ok=True)
    annotations = synthetic_annotations(include_unreachable=include_unreachable)
    for index, ann in enumerate(annotations):
        if ann.container_id == "pu-far-01":
            track = _unreachable_track()
        else:
            # Vary the glide start per configuration so tracks differ.
            start = (700.0 + 5.0 * (index % 7), 250.0 - 8.0 * (index % 5))
            track = _pose_track(start)
        save_pose_track(track, root / ann.pose_path)
    annotation_path = root / "annotations.csv"
    save_annotations(annotations, annotation_path)
    layout = {"annotations": annotation_path, "poses": root / "poses"}
    if with_perfect_predictions:
        test_configs = [a for a in annotations
                        if a.split in (Split.PUBLIC_TEST, Split.PRIVATE_TEST)]
        predictions_path = root / "predictions_perfect.csv"
        save_predictions(perfect_predictions(test_configs), predictions_path)
        layout["perfect_predictions"] = predictions_path
    return layout
