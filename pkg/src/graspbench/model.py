"""Data model for container-manipulation benchmark runs.

A *configuration* is one recorded manipulation of a container with a given
filling under a specific setting. Annotations store the measured ground
truth per configuration, predictions store one algorithm's estimates for
the five estimation tasks, pose tracks store keyframed container
trajectories used by the handover replay, and the density table maps
filling types to volumetric densities derived from training data.

All structures are immutable and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import ClassVar, Iterable, Mapping, Sequence

import numpy as np

TASKS = ("T1", "T2", "T3", "T4", "T5")

# Prediction fields carrying each task's estimate.
TASK_FIELDS: Mapping[str, tuple[str, ...]] = {
    "T1": ("fill_level",),
    "T2": ("fill_type",),
    "T3": ("capacity_ml",),
    "T4": ("container_mass_g",),
    "T5": ("width_top_mm", "width_bottom_mm", "height_mm"),
}

# Relative tolerance for the parse-time fill-mass consistency check.
ANNOTATION_MASS_TOL = 0.01


class Category(str, Enum):
    """Container categories covered by the benchmark."""

    CUP = "cup"
    DRINKING_GLASS = "drinking-glass"
    FOOD_BOX = "food-box"


class FillType(IntEnum):
    """Content classes (0 encodes "no content")."""

    NONE = 0
    PASTA = 1
    RICE = 2
    WATER = 3


class FillLevel(IntEnum):
    """Fullness classes; FULL means 90% of capacity, not 100%."""

    EMPTY = 0
    HALF = 1
    FULL = 2

    @property
    def fraction(self) -> float:
        """Filled fraction of the container capacity."""
        return (0.0, 0.5, 0.9)[int(self)]


class Split(str, Enum):
    TRAIN = "train"
    PUBLIC_TEST = "public-test"
    PRIVATE_TEST = "private-test"


@dataclass(frozen=True)
class ConfigurationAnnotation:
    """Ground truth for one recorded configuration."""

    config_id: str
    container_id: str
    category: Category
    capacity_ml: float
    container_mass_g: float
    width_top_mm: float
    width_bottom_mm: float
    height_mm: float
    fill_type: FillType
    fill_level: FillLevel
    fill_mass_g: float
    handover_frame: int  # frame where the person starts delivering the object
    fps: float
    pose_path: str  # pose track CSV, relative to the annotation file
    target_mm: tuple[float, float, float]  # delivery target location
    split: Split

    @property
    def object_mass_g(self) -> float:
        """Mass of container plus content."""
        return self.container_mass_g + self.fill_mass_g

    @property
    def grasp_width_mm(self) -> float:
        """Width presented to the gripper: top width, widest side for boxes."""
        if self.category is Category.FOOD_BOX:
            return max(self.width_top_mm, self.width_bottom_mm)
        return self.width_top_mm

    def validate(self) -> None:
        """Raise ValueError on any violated annotation invariant."""
        if self.capacity_ml <= 0:
            raise ValueError("non-positive capacity")
        if self.container_mass_g <= 0:
            raise ValueError("non-positive container mass")
        if self.width_top_mm <= 0 or self.width_bottom_mm <= 0:
            raise ValueError("non-positive width")
        if self.height_mm <= 0:
            raise ValueError("non-positive height")
        if self.fill_mass_g < 0:
            raise ValueError("negative filling mass")
        if self.handover_frame < 0:
            raise ValueError("negative handover frame")
        if self.fps <= 0:
            raise ValueError("non-positive frame rate")
        empty_markers = (
            self.fill_type is FillType.NONE,
            self.fill_level is FillLevel.EMPTY,
            self.fill_mass_g == 0,
        )
        if any(empty_markers) and not all(empty_markers):
            raise ValueError("inconsistent empty filling")
        if self.fill_type is FillType.WATER:
            # Water density is 1 g/mL, so mass must match level x capacity.
            expected = self.fill_level.fraction * self.capacity_ml
            if abs(self.fill_mass_g - expected) > ANNOTATION_MASS_TOL * expected:
                raise ValueError("filling mass inconsistent with capacity and level")


@dataclass(frozen=True)
class PredictionRecord:
    """One algorithm's estimates for a single configuration.

    None marks a measure the algorithm did not estimate (encoded as -1 in
    prediction files).
    """

    config_id: str
    fill_level: FillLevel | None = None
    fill_type: FillType | None = None
    capacity_ml: float | None = None
    container_mass_g: float | None = None
    width_top_mm: float | None = None
    width_bottom_mm: float | None = None
    height_mm: float | None = None

    def estimates_task(self, task: str) -> bool:
        return any(getattr(self, f) is not None for f in TASK_FIELDS[task])

    def validate(self) -> None:
        """Raise ValueError when an estimated measure is not strictly positive."""
        for name in ("capacity_ml", "container_mass_g", "width_top_mm",
                     "width_bottom_mm", "height_mm"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"non-positive {name}")


@dataclass(frozen=True)
class PredictionSet:
    """All prediction records of one algorithm, keyed by config_id.

    tasks_addressed defaults to "a task is addressed iff at least one record
    estimates it". It is kept explicit so that filling in baseline values for
    unaddressed tasks does not change the task count used for score weights.
    """

    algorithm: str
    records: tuple[PredictionRecord, ...]
    tasks_addressed: frozenset[str] = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.tasks_addressed is None:
            addressed = frozenset(
                task for task in TASKS
                if any(rec.estimates_task(task) for rec in self.records)
            )
            object.__setattr__(self, "tasks_addressed", addressed)
        object.__setattr__(self, "_index", {r.config_id: r for r in self.records})

    def record(self, config_id: str) -> PredictionRecord:
        """Record for a configuration; all-not-estimated when absent."""
        return self._index.get(config_id) or PredictionRecord(config_id=config_id)


@dataclass(frozen=True)
class PoseTrack:
    """Keyframed 6-DoF container trajectory.

    Translations are in mm, rotations are unit quaternions in xyzw order.
    """

    frames: tuple[int, ...]
    translations: np.ndarray  # (N, 3)
    rotations: np.ndarray  # (N, 4)

    QUAT_NORM_TOL: ClassVar[float] = 1e-6

    @property
    def frame_count(self) -> int:
        return self.frames[-1] + 1

    def keyframes(self) -> Iterable[tuple[int, np.ndarray, np.ndarray]]:
        return zip(self.frames, self.translations, self.rotations)

    def validate(self) -> None:
        if len(self.frames) == 0:
            raise ValueError("pose track has no keyframes")
        for prev, cur in zip(self.frames, self.frames[1:]):
            if cur <= prev:
                raise ValueError(f"keyframe frames not strictly increasing at {cur}")
        norms = np.linalg.norm(self.rotations, axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > self.QUAT_NORM_TOL)[0]
        if bad.size:
            raise ValueError(
                f"non-unit quaternion at keyframe {int(bad[0])} "
                f"(norm {norms[bad[0]]:.6g})"
            )


@dataclass(frozen=True)
class DensityTable:
    """Filling-type densities in g/mL derived from training annotations.

    per_container holds one entry per (container_id, fill_type) seen in
    training; per_type holds the container-level mean used for containers
    outside the training set. Water is pinned to 1.0.
    """

    per_container: Mapping[tuple[str, FillType], float]
    per_type: Mapping[FillType, float]

    def density(self, fill_type: FillType, container_id: str | None = None) -> float:
        if container_id is not None:
            value = self.per_container.get((container_id, fill_type))
            if value is not None:
                return value
        value = self.per_type.get(fill_type)
        if value is None:
            raise KeyError(f"no density for filling type '{fill_type.name.lower()}'")
        return value


def build_density_table(train: Sequence[ConfigurationAnnotation]) -> DensityTable:
    """Derive densities from non-empty training configurations.

    Per-container density is the mean of fill_mass / (fraction * capacity)
    over that container's configurations of the type; the per-type fallback
    averages the per-container values. Values are summed in sorted order so
    the result is invariant to the row order of the training set.
    """
    samples: dict[tuple[str, FillType], list[float]] = {}
    for ann in train:
        if ann.fill_type in (FillType.PASTA, FillType.RICE) and ann.fill_mass_g > 0:
            ratio = ann.fill_mass_g / (ann.fill_level.fraction * ann.capacity_ml)
            samples.setdefault((ann.container_id, ann.fill_type), []).append(ratio)

    per_container = {
        key: sum(sorted(values)) / len(values)
        for key, values in sorted(samples.items())
    }
    per_type: dict[FillType, float] = {}
    for fill_type in (FillType.PASTA, FillType.RICE):
        entries = [v for (_, t), v in sorted(per_container.items()) if t is fill_type]
        if not entries:
            raise ValueError(
                f"no training sample for filling type '{fill_type.name.lower()}'"
            )
        per_type[fill_type] = sum(entries) / len(entries)
    per_type[FillType.WATER] = 1.0
    return DensityTable(per_container=per_container, per_type=per_type)


def select_split(
    annotations: Sequence[ConfigurationAnnotation],
    split: Split | str | None,
) -> list[ConfigurationAnnotation]:
    """Annotations of one split ("combined" = both test sets), sorted by config_id."""
    if split is None:
        keep = list(annotations)
    elif split == "combined":
        keep = [a for a in annotations
                if a.split in (Split.PUBLIC_TEST, Split.PRIVATE_TEST)]
    else:
        split = Split(split)
        keep = [a for a in annotations if a.split is split]
    return sorted(keep, key=lambda a: a.config_id)
