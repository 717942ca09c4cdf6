"""CSV input and output for annotations, predictions, and pose tracks.

File schemas:

* annotations: ``config_id,container_id,category,capacity_ml,mass_g,wt_mm,
  wb_mm,h_mm,fill_type,fill_level,fill_mass_g,handover_frame,fps,pose_path,
  target_x_mm,target_y_mm,target_z_mm,split``
* predictions: ``config_id,fill_level,fill_type,capacity_ml,mass_g,wt_mm,
  wb_mm,h_mm`` with -1 encoding "not estimated"; fill_level in {0,1,2} for
  {empty, 50%, 90%}, fill_type in {0,1,2,3}
* pose tracks: ``frame,tx_mm,ty_mm,tz_mm,qx,qy,qz,qw``

Loaders are pure functions of file content and return immutable structures.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

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

ANNOTATION_HEADER = [
    "config_id", "container_id", "category", "capacity_ml", "mass_g",
    "wt_mm", "wb_mm", "h_mm", "fill_type", "fill_level", "fill_mass_g",
    "handover_frame", "fps", "pose_path",
    "target_x_mm", "target_y_mm", "target_z_mm", "split",
]
PREDICTION_HEADER = [
    "config_id", "fill_level", "fill_type", "capacity_ml", "mass_g",
    "wt_mm", "wb_mm", "h_mm",
]
POSE_HEADER = ["frame", "tx_mm", "ty_mm", "tz_mm", "qx", "qy", "qz", "qw"]

NOT_ESTIMATED = -1


class ParseError(Exception):
    """A benchmark file could not be parsed or failed validation."""

    def __init__(self, path, message: str, row: int | None = None,
                 field: str | None = None):
        self.path = str(path)
        self.row = row
        self.field = field
        where = self.path
        if row is not None:
            where += f", row {row}"
        if field is not None:
            where += f", field '{field}'"
        super().__init__(f"{where}: {message}")


def _read_rows(path, expected_header: Sequence[str]) -> list[dict[str, str]]:
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(path, "empty file") from None
        header = [name.strip() for name in header]
        missing = [name for name in expected_header if name not in header]
        if missing:
            raise ParseError(path, f"missing column '{missing[0]}'", row=1)
        extra = [name for name in header if name not in expected_header]
        if extra:
            raise ParseError(path, f"unexpected column '{extra[0]}'", row=1)
        rows = []
        for lineno, values in enumerate(reader, start=2):
            if not values:
                continue
            if len(values) != len(header):
                raise ParseError(path, f"expected {len(header)} fields, "
                                 f"got {len(values)}", row=lineno)
            rows.append(dict(zip(header, (v.strip() for v in values))))
        return rows


def _parse(path, lineno: int, field: str, raw: str, convert: Callable):
    try:
        return convert(raw)
    except (ValueError, KeyError):
        raise ParseError(path, f"invalid value '{raw}'", row=lineno,
                         field=field) from None


def load_annotations(path) -> list[ConfigurationAnnotation]:
    """Parse and validate an annotation CSV, preserving row order."""
    path = Path(path)
    annotations = []
    seen: set[str] = set()
    for lineno, row in enumerate(_read_rows(path, ANNOTATION_HEADER), start=2):
        config_id = row["config_id"]
        if not config_id:
            raise ParseError(path, "empty config_id", row=lineno, field="config_id")
        if config_id in seen:
            raise ParseError(path, f"duplicate config_id '{config_id}'", row=lineno)
        seen.add(config_id)
        ann = ConfigurationAnnotation(
            config_id=config_id,
            container_id=row["container_id"],
            category=_parse(path, lineno, "category", row["category"], Category),
            capacity_ml=_parse(path, lineno, "capacity_ml", row["capacity_ml"], float),
            container_mass_g=_parse(path, lineno, "mass_g", row["mass_g"], float),
            width_top_mm=_parse(path, lineno, "wt_mm", row["wt_mm"], float),
            width_bottom_mm=_parse(path, lineno, "wb_mm", row["wb_mm"], float),
            height_mm=_parse(path, lineno, "h_mm", row["h_mm"], float),
            fill_type=_parse(path, lineno, "fill_type", row["fill_type"],
                             lambda v: FillType(int(v))),
            fill_level=_parse(path, lineno, "fill_level", row["fill_level"],
                              lambda v: FillLevel(int(v))),
            fill_mass_g=_parse(path, lineno, "fill_mass_g", row["fill_mass_g"], float),
            handover_frame=_parse(path, lineno, "handover_frame",
                                  row["handover_frame"], int),
            fps=_parse(path, lineno, "fps", row["fps"], float),
            pose_path=row["pose_path"],
            target_mm=(
                _parse(path, lineno, "target_x_mm", row["target_x_mm"], float),
                _parse(path, lineno, "target_y_mm", row["target_y_mm"], float),
                _parse(path, lineno, "target_z_mm", row["target_z_mm"], float),
            ),
            split=_parse(path, lineno, "split", row["split"], Split),
        )
        try:
            ann.validate()
        except ValueError as err:
            raise ParseError(path, str(err), row=lineno) from None
        annotations.append(ann)
    return annotations


def save_annotations(annotations: Sequence[ConfigurationAnnotation], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(ANNOTATION_HEADER)
        for a in annotations:
            writer.writerow([
                a.config_id, a.container_id, a.category.value,
                repr(a.capacity_ml), repr(a.container_mass_g),
                repr(a.width_top_mm), repr(a.width_bottom_mm), repr(a.height_mm),
                int(a.fill_type), int(a.fill_level), repr(a.fill_mass_g),
                a.handover_frame, repr(a.fps), a.pose_path,
                repr(a.target_mm[0]), repr(a.target_mm[1]), repr(a.target_mm[2]),
                a.split.value,
            ])


def _optional_float(raw: str) -> float | None:
    value = float(raw)
    return None if value == NOT_ESTIMATED else value


def _optional_enum(enum_cls):
    def convert(raw: str):
        value = int(raw)
        return None if value == NOT_ESTIMATED else enum_cls(value)
    return convert


def load_predictions(path, expected_configs: Sequence[str],
                     algorithm: str | None = None) -> PredictionSet:
    """Parse a prediction CSV against the configurations it must cover.

    Configurations absent from the file become all-not-estimated records;
    configurations unknown to the caller are an error.
    """
    path = Path(path)
    expected = list(expected_configs)
    expected_set = set(expected)
    parsed: dict[str, PredictionRecord] = {}
    unknown: list[str] = []
    for lineno, row in enumerate(_read_rows(path, PREDICTION_HEADER), start=2):
        config_id = row["config_id"]
        if config_id in parsed:
            raise ParseError(path, f"duplicate config_id '{config_id}'", row=lineno)
        if config_id not in expected_set:
            unknown.append(config_id)
            continue
        record = PredictionRecord(
            config_id=config_id,
            fill_level=_parse(path, lineno, "fill_level", row["fill_level"],
                              _optional_enum(FillLevel)),
            fill_type=_parse(path, lineno, "fill_type", row["fill_type"],
                             _optional_enum(FillType)),
            capacity_ml=_parse(path, lineno, "capacity_ml", row["capacity_ml"],
                               _optional_float),
            container_mass_g=_parse(path, lineno, "mass_g", row["mass_g"],
                                    _optional_float),
            width_top_mm=_parse(path, lineno, "wt_mm", row["wt_mm"], _optional_float),
            width_bottom_mm=_parse(path, lineno, "wb_mm", row["wb_mm"],
                                   _optional_float),
            height_mm=_parse(path, lineno, "h_mm", row["h_mm"], _optional_float),
        )
        try:
            record.validate()
        except ValueError as err:
            raise ParseError(path, str(err), row=lineno) from None
        parsed[config_id] = record
    if unknown:
        raise ParseError(path, "unknown config_id(s): " + ", ".join(sorted(unknown)))
    records = tuple(
        parsed.get(cid) or PredictionRecord(config_id=cid) for cid in expected
    )
    return PredictionSet(algorithm=algorithm or path.stem, records=records)


def save_predictions(predictions: PredictionSet, path) -> None:
    def encode(value) -> str:
        if value is None:
            return str(NOT_ESTIMATED)
        return repr(float(value))

    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(PREDICTION_HEADER)
        for r in predictions.records:
            writer.writerow([
                r.config_id,
                NOT_ESTIMATED if r.fill_level is None else int(r.fill_level),
                NOT_ESTIMATED if r.fill_type is None else int(r.fill_type),
                encode(r.capacity_ml), encode(r.container_mass_g),
                encode(r.width_top_mm), encode(r.width_bottom_mm),
                encode(r.height_mm),
            ])


def load_pose_track(path) -> PoseTrack:
    """Parse a pose track CSV into a validated keyframe sequence."""
    path = Path(path)
    frames: list[int] = []
    translations: list[tuple[float, float, float]] = []
    rotations: list[tuple[float, float, float, float]] = []
    for lineno, row in enumerate(_read_rows(path, POSE_HEADER), start=2):
        frames.append(_parse(path, lineno, "frame", row["frame"], int))
        translations.append(tuple(
            _parse(path, lineno, name, row[name], float)
            for name in ("tx_mm", "ty_mm", "tz_mm")
        ))
        rotations.append(tuple(
            _parse(path, lineno, name, row[name], float)
            for name in ("qx", "qy", "qz", "qw")
        ))
    track = PoseTrack(
        frames=tuple(frames),
        translations=np.array(translations, dtype=float).reshape(len(frames), 3),
        rotations=np.array(rotations, dtype=float).reshape(len(frames), 4),
    )
    try:
        track.validate()
    except ValueError as err:
        raise ParseError(path, str(err)) from None
    track.translations.flags.writeable = False
    track.rotations.flags.writeable = False
    return track


def save_pose_track(track: PoseTrack, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(POSE_HEADER)
        for frame, translation, rotation in track.keyframes():
            writer.writerow([frame] + [repr(float(v)) for v in translation]
                            + [repr(float(v)) for v in rotation])


def load_pose_tracks(annotations: Sequence[ConfigurationAnnotation],
                     base_dir) -> dict[str, PoseTrack]:
    """Resolve and load the pose track of every annotation.

    Track paths are relative to base_dir (normally the annotation file's
    directory). The annotated handover frame must fall inside the track's
    keyframe range.
    """
    base_dir = Path(base_dir)
    tracks: dict[str, PoseTrack] = {}
    for ann in annotations:
        track_path = base_dir / ann.pose_path
        if not track_path.exists():
            raise ParseError(track_path, f"missing pose track for "
                             f"configuration '{ann.config_id}'")
        track = load_pose_track(track_path)
        if not track.frames[0] <= ann.handover_frame <= track.frames[-1]:
            raise ParseError(
                track_path,
                f"handover frame {ann.handover_frame} of configuration "
                f"'{ann.config_id}' outside keyframe range "
                f"[{track.frames[0]}, {track.frames[-1]}]",
            )
        tracks[ann.config_id] = track
    return tracks
