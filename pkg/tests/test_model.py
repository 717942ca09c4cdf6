from __future__ import annotations

import dataclasses

import pytest

from graspbench.model import (
    Category,
    ConfigurationAnnotation,
    FillLevel,
    FillType,
    PredictionRecord,
    PredictionSet,
    Split,
    build_density_table,
    select_split,
)


def make_annotation(**overrides) -> ConfigurationAnnotation:
    base = dict(
        config_id="c-01", container_id="box-1", category=Category.FOOD_BOX,
        capacity_ml=1000.0, container_mass_g=120.0, width_top_mm=110.0,
        width_bottom_mm=110.0, height_mm=180.0, fill_type=FillType.PASTA,
        fill_level=FillLevel.HALF, fill_mass_g=300.0, handover_frame=30,
        fps=30.0, pose_path="poses/c-01.csv", target_mm=(250.0, -250.0, 20.0),
        split=Split.TRAIN,
    )
    base.update(overrides)
    return ConfigurationAnnotation(**base)


def test_fill_level_fractions():
    assert FillLevel.EMPTY.fraction == 0.0
    assert FillLevel.HALF.fraction == 0.5
    assert FillLevel.FULL.fraction == 0.9


def test_annotation_object_mass_and_grasp_width():
    ann = make_annotation()
    assert ann.object_mass_g == 420.0
    assert ann.grasp_width_mm == 110.0
    cup = make_annotation(category=Category.CUP, width_top_mm=80.0,
                          width_bottom_mm=95.0)
    # Cups grasp at the top width even when the base is wider.
    assert cup.grasp_width_mm == 80.0
    box = make_annotation(width_top_mm=90.0, width_bottom_mm=95.0)
    assert box.grasp_width_mm == 95.0


def test_annotation_validate_rejects_inconsistent_empty():
    ann = make_annotation(fill_type=FillType.NONE, fill_level=FillLevel.EMPTY,
                          fill_mass_g=10.0)
    with pytest.raises(ValueError, match="inconsistent empty filling"):
        ann.validate()


def test_annotation_validate_rejects_non_positive_capacity():
    with pytest.raises(ValueError, match="non-positive capacity"):
        make_annotation(capacity_ml=-5.0).validate()


def test_annotation_validate_checks_water_mass():
    ok = make_annotation(fill_type=FillType.WATER, fill_mass_g=500.0)
    ok.validate()
    off = make_annotation(fill_type=FillType.WATER, fill_mass_g=540.0)
    with pytest.raises(ValueError, match="inconsistent with capacity"):
        off.validate()


def test_prediction_record_positivity():
    PredictionRecord(config_id="c", capacity_ml=10.0).validate()
    with pytest.raises(ValueError, match="non-positive capacity_ml"):
        PredictionRecord(config_id="c", capacity_ml=0.0).validate()


def test_prediction_set_tasks_addressed():
    records = (
        PredictionRecord(config_id="a", container_mass_g=100.0),
        PredictionRecord(config_id="b"),
    )
    preds = PredictionSet(algorithm="x", records=records)
    assert preds.tasks_addressed == frozenset({"T4"})
    assert preds.record("b").container_mass_g is None
    # Unknown configurations resolve to an all-not-estimated record.
    assert preds.record("zzz") == PredictionRecord(config_id="zzz")


def test_density_table_direct_formula():
    ann = make_annotation(fill_mass_g=300.0, fill_level=FillLevel.HALF,
                          capacity_ml=1000.0)
    table = build_density_table([ann, make_annotation(
        config_id="c-02", fill_type=FillType.RICE, fill_level=FillLevel.FULL,
        fill_mass_g=0.9 * 1000.0 * 0.85)])
    assert table.density(FillType.PASTA, "box-1") == pytest.approx(0.6)
    assert table.density(FillType.RICE) == pytest.approx(0.85)


def test_density_table_water_is_one_regardless_of_data():
    anns = [
        make_annotation(),
        make_annotation(config_id="c-02", fill_type=FillType.RICE,
                        fill_mass_g=200.0),
        # A water row with a (tolerated) 0.5% heavy fill must not move D(water).
        make_annotation(config_id="c-03", fill_type=FillType.WATER,
                        fill_mass_g=502.0),
    ]
    table = build_density_table(anns)
    assert table.density(FillType.WATER) == 1.0
    assert table.density(FillType.WATER, "box-1") == 1.0


def test_density_table_averages_per_container():
    a = make_annotation(fill_mass_g=300.0)  # density 0.6
    b = make_annotation(config_id="c-02", fill_level=FillLevel.FULL,
                        fill_mass_g=0.8 * 0.9 * 1000.0)  # density 0.8
    rice = make_annotation(config_id="c-03", fill_type=FillType.RICE,
                           fill_mass_g=425.0)
    table = build_density_table([a, b, rice])
    assert table.density(FillType.PASTA, "box-1") == pytest.approx(0.7)


def test_density_table_missing_type_errors():
    only_pasta = [make_annotation()]
    with pytest.raises(ValueError, match="no training sample.*rice"):
        build_density_table(only_pasta)


def test_density_table_order_invariant():
    rows = [
        make_annotation(fill_mass_g=300.0),
        make_annotation(config_id="c-02", fill_level=FillLevel.FULL,
                        fill_mass_g=612.0),
        make_annotation(config_id="c-03", container_id="box-2",
                        fill_mass_g=290.0),
        make_annotation(config_id="c-04", fill_type=FillType.RICE,
                        fill_mass_g=430.0),
        make_annotation(config_id="c-05", container_id="box-2",
                        fill_type=FillType.RICE, fill_mass_g=410.0),
    ]
    forward = build_density_table(rows)
    backward = build_density_table(list(reversed(rows)))
    assert forward == backward


def test_density_table_unknown_type_errors():
    table = build_density_table([
        make_annotation(),
        make_annotation(config_id="c-02", fill_type=FillType.RICE,
                        fill_mass_g=400.0),
    ])
    with pytest.raises(KeyError):
        table.density(FillType.NONE)


def test_select_split_combined_and_sorting(annotations):
    combined = select_split(annotations, "combined")
    assert combined
    assert all(a.split is not Split.TRAIN for a in combined)
    ids = [a.config_id for a in combined]
    assert ids == sorted(ids)
    train = select_split(annotations, Split.TRAIN)
    assert all(a.split is Split.TRAIN for a in train)
    assert len(select_split(annotations, None)) == len(annotations)
