"""Performance scores for container-property estimation submissions.

Thirteen scores are computed per evaluation split. Classification tasks
(filling level, filling type) use a support-weighted mean F1; capacity and
container mass use exp(-relative_error); dimensions use a relative accuracy
clamped to zero at 100% error; filling mass combines the three estimates
through the density table. Group scores cover the joint filling
classification, a capacity/dimensions composite, and the two handover
scores produced by the simulator. The overall score is a fixed weighted
average in which the handover weights scale with the fraction of the five
tasks the algorithm addressed.

All scores are kept in [0, 1] internally and reported as percentages.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

from .model import (
    ConfigurationAnnotation,
    DensityTable,
    FillLevel,
    FillType,
    PredictionRecord,
    PredictionSet,
    Split,
    select_split,
)

SCORE_KEYS = ("s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10",
              "s11", "s12")

BASE_WEIGHTS: Mapping[str, float] = {
    "s1": 1 / 8, "s2": 1 / 8, "s3": 1 / 8, "s4": 1 / 8,
    "s5": 1 / 24, "s6": 1 / 24, "s7": 1 / 24,
    "s8": 1 / 8, "s9": 1 / 8, "s10": 1 / 8,
}

# The two simulated-handover scores carry reduced weight for algorithms that
# address fewer tasks; the direct weights are not rescaled.
TASK_COUNT_SCALED = ("s9", "s10")

MEASURES = ("capacity", "container_mass", "width_top", "width_bottom",
            "height", "fill_mass")
MEASURE_SCORE_KEY = {
    "capacity": "s3", "container_mass": "s4", "width_top": "s5",
    "width_bottom": "s6", "height": "s7", "fill_mass": "s8",
}
_EXP_MEASURES = frozenset({"capacity", "container_mass", "fill_mass"})
_PREDICTION_FIELD = {
    "capacity": "capacity_ml", "container_mass": "container_mass_g",
    "width_top": "width_top_mm", "width_bottom": "width_bottom_mm",
    "height": "height_mm",
}
_ANNOTATION_FIELD = {
    "capacity": "capacity_ml", "container_mass": "container_mass_g",
    "width_top": "width_top_mm", "width_bottom": "width_bottom_mm",
    "height": "height_mm", "fill_mass": "fill_mass_g",
}

# The feasible joint (type, level) classes: empty containers have no content
# type, filled containers pair every type with the two non-empty levels.
FEASIBLE_FILLINGS: tuple[tuple[FillType, FillLevel], ...] = (
    (FillType.NONE, FillLevel.EMPTY),
    (FillType.PASTA, FillLevel.HALF), (FillType.PASTA, FillLevel.FULL),
    (FillType.RICE, FillLevel.HALF), (FillType.RICE, FillLevel.FULL),
    (FillType.WATER, FillLevel.HALF), (FillType.WATER, FillLevel.FULL),
)


class ScoringError(Exception):
    """Raised when a score cannot be computed from the given inputs."""


@dataclass(frozen=True)
class ClassMetrics:
    """Per-class precision/recall/F1 with the class's configuration count."""

    label: Hashable
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class PerConfigScore:
    """One configuration's contribution to a regression-style task score."""

    config_id: str
    measure: str
    estimated: bool
    error: float | None
    contribution: float


def weighted_f1(
    predictions: Sequence[Hashable | None],
    truths: Sequence[Hashable],
    labels: Sequence[Hashable] | None = None,
) -> tuple[float, list[ClassMetrics]]:
    """Support-weighted mean F1 over the label set.

    A prediction of None (not estimated) or of a label outside the set
    counts against its true class as a false negative without producing a
    false positive anywhere. Classes absent from the truths have zero
    support and drop out of the weighted mean.
    """
    if len(predictions) != len(truths):
        raise ValueError("predictions and truths differ in length")
    if not truths:
        raise ValueError("no samples to score")
    if labels is None:
        labels = sorted(set(truths))
    label_set = set(labels)
    stray = [t for t in truths if t not in label_set]
    if stray:
        raise ValueError(f"truth label {stray[0]!r} not in label set")

    total = len(truths)
    weighted = 0.0
    metrics: list[ClassMetrics] = []
    for label in labels:
        tp = fp = fn = 0
        for pred, truth in zip(predictions, truths):
            if truth == label:
                if pred == truth:
                    tp += 1
                else:
                    fn += 1
            elif pred == label:
                fp += 1
        support = tp + fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        weighted += support * f1
        metrics.append(ClassMetrics(label, precision, recall, f1, support))
    return weighted / total, metrics


def relative_error(estimate: float, truth: float) -> float:
    """Relative absolute error |a - b| / b of an estimate against the truth."""
    if truth <= 0:
        raise ValueError("truth measure must be strictly positive")
    return abs(estimate - truth) / truth


def dimension_accuracy(estimate: float, truth: float) -> float:
    """1 - |a - b| / b, clamped to 0 once the error reaches the truth itself."""
    if truth <= 0:
        raise ValueError("truth measure must be strictly positive")
    gap = abs(estimate - truth)
    return 1.0 - gap / truth if gap < truth else 0.0


def filling_mass(level_fraction: float, capacity_ml: float,
                 fill_type: FillType, densities: DensityTable) -> float:
    """Content mass in grams implied by level, capacity, and type.

    Zero whenever the level is empty or the type is "no content"; otherwise
    fraction * capacity * density(type).
    """
    if level_fraction == 0.0 or fill_type is FillType.NONE:
        return 0.0
    if capacity_ml is None or capacity_ml <= 0:
        raise ValueError("capacity must be strictly positive for a non-empty filling")
    return level_fraction * capacity_ml * densities.density(fill_type)


def filling_mass_error(estimate_g: float, truth_g: float) -> float:
    """Relative filling-mass error with special handling of empty truths.

    Returns 0 when both masses are zero, the raw estimated mass when only
    the truth is zero, and the relative absolute error otherwise.
    """
    if truth_g == 0:
        return 0.0 if estimate_g == 0 else estimate_g
    return abs(estimate_g - truth_g) / truth_g


def _contribution(measure: str, estimate: float, truth: float) -> tuple[float, float]:
    if measure == "fill_mass":
        error = filling_mass_error(estimate, truth)
        return error, math.exp(-error)
    if measure in _EXP_MEASURES:
        error = relative_error(estimate, truth)
        return error, math.exp(-error)
    error = relative_error(estimate, truth)
    return error, dimension_accuracy(estimate, truth)


def task_score(
    measure: str,
    config_ids: Sequence[str],
    estimates: Sequence[float | None],
    truths: Sequence[float],
) -> tuple[float, list[PerConfigScore]]:
    """Mean per-configuration contribution for one measure.

    A not-estimated entry contributes 0 but still counts in the
    denominator, so skipping configurations always costs score.
    """
    if measure not in MEASURES:
        raise ValueError(f"unknown measure '{measure}'")
    if not truths:
        raise ScoringError("no configurations to score")
    rows: list[PerConfigScore] = []
    total = 0.0
    for config_id, estimate, truth in zip(config_ids, estimates, truths):
        if estimate is None:
            rows.append(PerConfigScore(config_id, measure, False, None, 0.0))
            continue
        error, contribution = _contribution(measure, estimate, truth)
        total += contribution
        rows.append(PerConfigScore(config_id, measure, True, error, contribution))
    return total / len(truths), rows


def joint_filling_score(
    level_predictions: Sequence[FillLevel | None],
    type_predictions: Sequence[FillType | None],
    level_truths: Sequence[FillLevel],
    type_truths: Sequence[FillType],
) -> tuple[float, list[ClassMetrics]]:
    """Weighted F1 over the seven feasible joint (type, level) classes.

    Predicted pairs that are incomplete or infeasible (such as "no content"
    at 50%) count as wrong for every class.
    """
    feasible = set(FEASIBLE_FILLINGS)
    truths = list(zip(type_truths, level_truths))
    predictions = [
        pair if pair in feasible else None
        for pair in zip(type_predictions, level_predictions)
    ]
    return weighted_f1(predictions, truths, labels=list(FEASIBLE_FILLINGS))


def capacity_dimensions_score(capacity_score: float, width_top_score: float,
                              width_bottom_score: float,
                              height_score: float) -> float:
    """Composite of the capacity score and the three dimension scores."""
    return capacity_score / 2 + (width_top_score + width_bottom_score
                                 + height_score) / 6


def overall_score(scores: Mapping[str, float | None], n_tasks: int) -> float:
    """Weighted average of s1..s10 with task-count scaling on s9/s10.

    Absent scores contribute 0 at full weight; the two handover scores are
    scaled by n_tasks / 5. Inputs and output are in [0, 1].
    """
    if not 0 <= n_tasks <= 5:
        raise ValueError("n_tasks must be between 0 and 5")
    terms = []
    for key, weight in BASE_WEIGHTS.items():
        value = scores.get(key)
        if value is None:
            continue
        if key in TASK_COUNT_SCALED:
            weight *= n_tasks / 5
        terms.append(weight * value)
    return math.fsum(terms)


def predicted_filling_mass(record: PredictionRecord,
                           densities: DensityTable) -> float | None:
    """Filling mass implied by a prediction record, None when not estimable.

    An empty prediction (empty level or "no content" type) pins the mass to
    zero even without a capacity estimate; otherwise level, type, and
    capacity must all be estimated.
    """
    if record.fill_level is None or record.fill_type is None:
        return None
    if record.fill_level is FillLevel.EMPTY or record.fill_type is FillType.NONE:
        return 0.0
    if record.capacity_ml is None:
        return None
    return filling_mass(record.fill_level.fraction, record.capacity_ml,
                        record.fill_type, densities)


def predicted_object_mass(record: PredictionRecord,
                          densities: DensityTable) -> float | None:
    """Container mass plus filling mass in grams, None when not estimable."""
    fill = predicted_filling_mass(record, densities)
    if fill is None or record.container_mass_g is None:
        return None
    return record.container_mass_g + fill


@dataclass
class ScoreReport:
    """Scores of one algorithm on one split, in percentages.

    ``scores`` maps s1..s12 and "S" to percentages (None when a score was
    not computed, e.g. the handover scores without a simulation run);
    ``addressed`` flags which scores rest on tasks the algorithm actually
    addressed, which drives the hyphens in leaderboard rows.
    """

    algorithm: str
    split: str
    scores: dict[str, float | None]
    weights: dict[str, float]
    n_tasks: int
    config_count: int
    addressed: dict[str, bool]
    per_config: list[PerConfigScore] = field(default_factory=list)
    sim: dict | None = None
    run: dict | None = None

    def to_dict(self) -> dict:
        """JSON-ready form; score values are rounded here and nowhere else."""
        def round2(value):
            return None if value is None else round(value, 2)

        return {
            "algorithm": self.algorithm,
            "split": self.split,
            "scores": {k: round2(v) for k, v in self.scores.items()},
            "weights": dict(self.weights),
            "n_tasks": self.n_tasks,
            "config_count": self.config_count,
            "addressed": dict(self.addressed),
            "per_config": [
                {
                    "config_id": row.config_id,
                    "measure": row.measure,
                    "estimated": int(row.estimated),
                    "error": None if row.error is None else round(row.error, 6),
                    "contribution": round(row.contribution, 6),
                }
                for row in self.per_config
            ],
            "sim": self.sim,
            "run": self.run,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


def evaluate(
    annotations: Sequence[ConfigurationAnnotation],
    predictions: PredictionSet,
    densities: DensityTable,
    sim_scores: tuple[float, float] | None = None,
    *,
    split: Split | str | None = "combined",
    s12_literal: bool = False,
    run: dict | None = None,
) -> ScoreReport:
    """Score a prediction set against the annotations of one split.

    sim_scores are the simulator's safety and delivery scores in percent;
    when omitted the corresponding entries stay None and contribute nothing
    to the overall score. With s12_literal the composite pairs the capacity
    score with container mass and the two widths instead of the three
    dimension scores.
    """
    selected = select_split(annotations, split)
    if not selected:
        raise ScoringError(f"no configurations in split '{split}'")
    config_ids = [a.config_id for a in selected]
    records = [predictions.record(cid) for cid in config_ids]

    s1, _ = weighted_f1([r.fill_level for r in records],
                        [a.fill_level for a in selected],
                        labels=list(FillLevel))
    s2, _ = weighted_f1([r.fill_type for r in records],
                        [a.fill_type for a in selected],
                        labels=list(FillType))

    internal: dict[str, float | None] = {"s1": s1, "s2": s2}
    per_config: list[PerConfigScore] = []
    for measure in ("capacity", "container_mass", "width_top",
                    "width_bottom", "height"):
        estimates = [getattr(r, _PREDICTION_FIELD[measure]) for r in records]
        truths = [getattr(a, _ANNOTATION_FIELD[measure]) for a in selected]
        value, rows = task_score(measure, config_ids, estimates, truths)
        internal[MEASURE_SCORE_KEY[measure]] = value
        per_config.extend(rows)

    fill_estimates = [predicted_filling_mass(r, densities) for r in records]
    s8, fill_rows = task_score("fill_mass", config_ids, fill_estimates,
                               [a.fill_mass_g for a in selected])
    internal["s8"] = s8
    per_config.extend(fill_rows)

    s11, _ = joint_filling_score([r.fill_level for r in records],
                                 [r.fill_type for r in records],
                                 [a.fill_level for a in selected],
                                 [a.fill_type for a in selected])
    internal["s11"] = s11
    if s12_literal:
        internal["s12"] = capacity_dimensions_score(
            internal["s3"], internal["s4"], internal["s5"], internal["s6"])
    else:
        internal["s12"] = capacity_dimensions_score(
            internal["s3"], internal["s5"], internal["s6"], internal["s7"])

    if sim_scores is not None:
        internal["s9"] = sim_scores[0] / 100.0
        internal["s10"] = sim_scores[1] / 100.0
    else:
        internal["s9"] = None
        internal["s10"] = None

    n_tasks = len(predictions.tasks_addressed)
    overall = overall_score(internal, n_tasks)

    tasks = predictions.tasks_addressed
    addressed = {
        "s1": "T1" in tasks, "s2": "T2" in tasks, "s3": "T3" in tasks,
        "s4": "T4" in tasks, "s5": "T5" in tasks, "s6": "T5" in tasks,
        "s7": "T5" in tasks,
        "s8": any(row.estimated for row in fill_rows),
        "s9": sim_scores is not None,
        "s10": sim_scores is not None,
        "s11": "T1" in tasks and "T2" in tasks,
        "s12": "T3" in tasks or "T5" in tasks,
        "S": True,
    }

    scores_pct: dict[str, float | None] = {}
    for key in SCORE_KEYS:
        value = internal.get(key)
        scores_pct[key] = None if value is None else value * 100.0
    scores_pct["S"] = overall * 100.0

    split_label = split.value if isinstance(split, Split) else (split or "all")
    return ScoreReport(
        algorithm=predictions.algorithm,
        split=split_label,
        scores=scores_pct,
        weights=dict(BASE_WEIGHTS),
        n_tasks=n_tasks,
        config_count=len(selected),
        addressed=addressed,
        per_config=per_config,
        run=run,
    )
