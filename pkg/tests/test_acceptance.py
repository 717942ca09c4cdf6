"""Acceptance suite.

Each test covers one acceptance criterion at its stated tolerance and
prints a single pass line (visible with ``pytest -s``); a failed assertion
leaves the criterion marked FAIL by pytest itself. The per-dataset task
scores of the original challenge are not reproducible without the private
recordings, so the aggregation stages are checked against the published
leaderboard columns instead and everything else is property-based.
"""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction

import pytest

from graspbench.model import Split, build_density_table
from graspbench.io import load_pose_tracks
from graspbench.scoring import (
    capacity_dimensions_score,
    evaluate,
    filling_mass_error,
    overall_score,
    weighted_f1,
)
from graspbench.simulator import (
    SimParams,
    delivery_accuracy,
    object_safety,
    run_handover,
    simulate_handovers,
    tip_over_angle,
)
from graspbench.synth import (
    perfect_predictions,
    synthetic_annotations,
    write_synthetic_dataset,
)

from test_scoring import bruteforce_weighted_f1

# Reference leaderboard columns (percent, None = task not addressed) with
# their task counts and published overall/composite values. Published
# numbers carry two decimals, so expected values are compared at that
# precision with an inclusive +/-0.01 tolerance.
REFERENCE_COLUMNS = {
    "baseline-random": dict(
        n=5, s=(37.62, 24.38, 24.58, 29.42, 32.33, 25.36, 42.48, 35.06,
                56.31, 72.11),
        overall=39.11, composite=28.99),
    "baseline-average": dict(
        n=5, s=(33.15, 23.01, 40.73, 22.06, 76.89, 58.19, 64.32, 42.31,
                58.30, 70.01),
        overall=44.51, composite=53.60),
    "prior-1": dict(
        n=2, s=(80.84, 94.50, None, None, None, None, None, 25.07, 55.22,
                73.94),
        overall=31.52, composite=None),
    "prior-2": dict(
        n=3, s=(43.53, 41.83, 62.57, None, None, None, None, 53.47, 64.13,
                78.76),
        overall=35.89, composite=None),
    "prior-3": dict(
        n=3, s=(78.56, 96.95, 54.79, None, None, None, None, 62.16, 66.84,
                72.91),
        overall=47.04, composite=None),
    "prior-4": dict(
        n=3, s=(79.65, 94.26, 60.57, None, None, None, None, 65.06, 65.04,
                80.40),
        overall=48.35, composite=None),
    "entry-1": dict(
        n=1, s=(None, None, None, 49.64, None, None, None, None, 53.54,
                60.54),
        overall=9.05, composite=None),
    "entry-2": dict(
        n=5, s=(65.73, 80.72, 72.26, 40.19, 69.09, 59.74, 70.07, 70.50,
                60.41, 73.17),
        overall=66.16, composite=69.28),
    "entry-3": dict(
        n=5, s=(77.40, 99.13, 59.51, 58.78, 80.01, 76.09, 74.33, 65.25,
                71.19, 79.32),
        overall=73.43, composite=68.16),
}

TOL = 0.01 + 1e-9


def _internal(column) -> dict:
    return {f"s{i + 1}": (None if v is None else v / 100.0)
            for i, v in enumerate(column["s"])}


def test_overall_aggregation_oracle():
    start = time.perf_counter()
    for name, column in REFERENCE_COLUMNS.items():
        got = round(100.0 * overall_score(_internal(column), column["n"]), 2)
        assert abs(got - column["overall"]) <= TOL, \
            f"{name}: {got} vs {column['overall']}"
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    print(f"\n[acceptance] overall-score aggregation oracle "
          f"(9 columns, {elapsed * 1e3:.1f} ms): PASS")


def test_capacity_dimensions_composite_oracle():
    for name, column in REFERENCE_COLUMNS.items():
        if column["composite"] is None:
            continue
        internal = _internal(column)
        got = round(100.0 * capacity_dimensions_score(
            internal["s3"], internal["s5"], internal["s6"], internal["s7"]), 2)
        assert abs(got - column["composite"]) <= TOL, \
            f"{name}: {got} vs {column['composite']}"
    print("[acceptance] capacity/dimensions composite oracle (4 columns): PASS")


def test_weight_identity_and_perfect_fixture(tmp_path):
    assert 4 * Fraction(1, 8) + 3 * Fraction(1, 24) + 3 * Fraction(1, 8) == 1
    assert 4 * (1 / 8) + 3 * (1 / 24) + 3 * (1 / 8) == 1.0

    root = tmp_path / "fixture"
    write_synthetic_dataset(root, with_perfect_predictions=False)
    annotations = synthetic_annotations()
    train = [a for a in annotations if a.split is Split.TRAIN]
    test = [a for a in annotations if a.split is not Split.TRAIN]
    densities = build_density_table(train)
    predictions = perfect_predictions(test)

    tracks = load_pose_tracks(annotations, root)
    masses = {a.config_id: a.object_mass_g for a in test}
    sim = simulate_handovers(test, tracks, masses, SimParams())
    assert sim.calibration.discarded == frozenset()
    assert sim.safety_score == pytest.approx(100.0, abs=1e-9)
    assert sim.delivery_score == pytest.approx(100.0, abs=1e-9)

    report = evaluate(annotations, predictions, densities,
                      sim_scores=(sim.safety_score, sim.delivery_score),
                      split="combined")
    for key in ("s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10",
                "s11", "s12"):
        assert report.scores[key] == pytest.approx(100.0, abs=1e-9), key
    assert report.scores["S"] == pytest.approx(100.0, abs=1e-9)
    print("[acceptance] weight identity and perfect-fixture S=100: PASS")


def test_weighted_f1_bruteforce_equivalence():
    rng = random.Random(987654321)
    for _ in range(1000):
        k = rng.randint(1, 10)
        n = rng.randint(1, 50)
        labels = list(range(k))
        truths = [rng.randrange(k) for _ in range(n)]
        predictions = []
        for _ in range(n):
            roll = rng.random()
            if roll < 0.1:
                predictions.append(None)  # not estimated
            elif roll < 0.2:
                predictions.append(k + 5)  # outside the label set
            else:
                predictions.append(rng.randrange(k))
        value, _ = weighted_f1(predictions, truths, labels=labels)
        oracle = bruteforce_weighted_f1(predictions, truths, labels)
        assert value == oracle
    print("[acceptance] weighted-F1 equals brute-force confusion matrix "
          "(1000 instances, exact): PASS")


def test_filling_mass_error_branch_coverage():
    assert filling_mass_error(0.0, 0.0) == 0.0
    rng = random.Random(24601)
    for _ in range(1000):
        estimate = rng.uniform(0.001, 2000.0)
        truth = rng.uniform(0.001, 2000.0)
        assert filling_mass_error(estimate, 0.0) == estimate
        assert filling_mass_error(estimate, truth) == abs(estimate - truth) / truth
        assert filling_mass_error(0.0, 0.0) == 0.0
    print("[acceptance] filling-mass error branch coverage "
          "(1000 pairs, exact): PASS")


def test_simulator_properties(tmp_path):
    root = tmp_path / "fixture"
    write_synthetic_dataset(root, with_perfect_predictions=False)
    annotations = synthetic_annotations()
    test = [a for a in annotations if a.split is not Split.TRAIN]
    tracks = load_pose_tracks(annotations, root)
    params = SimParams()

    # Determinism: two full runs produce bit-identical outcome lists.
    masses = {a.config_id: 0.8 * a.object_mass_g for a in test}
    first = simulate_handovers(test, tracks, masses, params)
    second = simulate_handovers(test, tracks, masses, params)
    assert first.outcomes == second.outcomes
    assert (first.safety_score, first.delivery_score) == \
        (second.safety_score, second.delivery_score)

    # Safety symmetry and strict monotonicity over a force-ratio sweep.
    for gap in (0.05, 0.2, 0.5, 0.9):
        assert object_safety(1 + gap, 1.0, 0.9) == \
            pytest.approx(object_safety(1 - gap, 1.0, 0.9), rel=1e-12)
    sweep = [object_safety(1 + gap, 1.0, 0.9)
             for gap in (0.0, 0.1, 0.25, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(sweep, sweep[1:]))

    # Ground-truth fixed point: every non-discarded configuration is perfect.
    gt_masses = {a.config_id: a.object_mass_g for a in test}
    gt = simulate_handovers(test, tracks, gt_masses, params)
    assert gt.calibration.discarded == frozenset()
    assert all(o.safety == 1.0 and o.delivery == 1.0 for o in gt.outcomes)

    # Delivery boundaries: zero exactly at the distance and tilt limits.
    tip = tip_over_angle(100.0, 150.0)
    assert delivery_accuracy(params.max_target_distance_mm, 0.0,
                             params.max_target_distance_mm, tip) == 0.0
    assert delivery_accuracy(0.0, tip, params.max_target_distance_mm, tip) == 0.0
    assert delivery_accuracy(0.0, 0.0, params.max_target_distance_mm, tip) == 1.0
    print("[acceptance] simulator determinism, safety symmetry and "
          "monotonicity, ground-truth fixed point, delivery boundaries: PASS")
