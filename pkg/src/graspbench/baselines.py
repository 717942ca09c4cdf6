"""Reference prediction generators and task filling.

Two baselines bracket submitted algorithms: uniform random estimates drawn
from the training ranges, and the plain training-set average. The same
machinery fills in the tasks a submission did not address, without changing
its task count (so the overall-score weighting still reflects what the
algorithm actually did).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .model import (
    TASK_FIELDS,
    TASKS,
    ConfigurationAnnotation,
    FillLevel,
    FillType,
    PredictionRecord,
    PredictionSet,
)

NUMERIC_FIELDS = ("capacity_ml", "container_mass_g", "width_top_mm",
                  "width_bottom_mm", "height_mm")
_ANNOTATION_ATTR = {
    "capacity_ml": "capacity_ml", "container_mass_g": "container_mass_g",
    "width_top_mm": "width_top_mm", "width_bottom_mm": "width_bottom_mm",
    "height_mm": "height_mm",
}


@dataclass(frozen=True)
class BaselineSpec:
    """How a baseline prediction set was generated (echoed into reports)."""

    mode: str  # "ran" or "avg"
    seed: int | None
    ranges: Mapping[str, tuple[float, float]]

    @classmethod
    def from_training(cls, mode: str, train: Sequence[ConfigurationAnnotation],
                      seed: int | None = None) -> "BaselineSpec":
        if mode not in ("ran", "avg"):
            raise ValueError(f"unknown baseline mode '{mode}'")
        if not train:
            raise ValueError("empty training set")
        ranges = {}
        for name in NUMERIC_FIELDS:
            values = [getattr(a, _ANNOTATION_ATTR[name]) for a in train]
            ranges[name] = (min(values), max(values))
        if mode == "ran":
            degenerate = [n for n, (lo, hi) in ranges.items() if not lo < hi]
            if degenerate:
                raise ValueError(f"degenerate training range for '{degenerate[0]}'")
        return cls(mode=mode, seed=seed, ranges=ranges)


def random_baseline(config_ids: Sequence[str],
                    train: Sequence[ConfigurationAnnotation],
                    seed: int, algorithm: str = "RAN") -> PredictionSet:
    """Uniform random estimates over the training ranges, seeded.

    Classes are drawn uniformly over their full enums; numeric measures
    uniformly over the training min-max. The draw order is fixed, so the
    result is a pure function of (config_ids, train, seed).
    """
    spec = BaselineSpec.from_training("ran", train, seed=seed)
    rng = np.random.default_rng(seed)
    records = []
    for config_id in config_ids:
        level = FillLevel(int(rng.integers(0, len(FillLevel))))
        fill_type = FillType(int(rng.integers(0, len(FillType))))
        numbers = {
            name: float(rng.uniform(lo, hi))
            for name, (lo, hi) in spec.ranges.items()
        }
        records.append(PredictionRecord(
            config_id=config_id, fill_level=level, fill_type=fill_type, **numbers))
    return PredictionSet(algorithm=algorithm, records=tuple(records))


def average_baseline(config_ids: Sequence[str],
                     train: Sequence[ConfigurationAnnotation],
                     algorithm: str = "AVG") -> PredictionSet:
    """Training means for numeric measures, modal classes for the rest.

    Class ties resolve to the lowest class index.
    """
    if not train:
        raise ValueError("empty training set")
    means = {
        name: sum(getattr(a, _ANNOTATION_ATTR[name]) for a in train) / len(train)
        for name in NUMERIC_FIELDS
    }
    level = _modal(Counter(a.fill_level for a in train))
    fill_type = _modal(Counter(a.fill_type for a in train))
    records = tuple(
        PredictionRecord(config_id=cid, fill_level=level, fill_type=fill_type,
                         **means)
        for cid in config_ids
    )
    return PredictionSet(algorithm=algorithm, records=records)


def _modal(counts: Counter):
    return min(counts, key=lambda label: (-counts[label], int(label)))


def fill_missing_tasks(predictions: PredictionSet,
                       filler: PredictionSet) -> PredictionSet:
    """Replace the fields of unaddressed tasks with the filler's values.

    Fields of addressed tasks are untouched even when individually not
    estimated, and the task count is preserved so the overall-score
    weighting is unchanged. Idempotent for a fixed filler.
    """
    missing_fields = [
        field
        for task in TASKS if task not in predictions.tasks_addressed
        for field in TASK_FIELDS[task]
    ]
    if not missing_fields:
        return predictions
    records = []
    for record in predictions.records:
        source = filler.record(record.config_id)
        records.append(replace(record, **{
            name: getattr(source, name) for name in missing_fields
        }))
    return PredictionSet(
        algorithm=predictions.algorithm,
        records=tuple(records),
        tasks_addressed=predictions.tasks_addressed,
    )
