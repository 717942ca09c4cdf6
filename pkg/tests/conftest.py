from __future__ import annotations

import pytest

from graspbench.model import Split, build_density_table
from graspbench.io import load_pose_tracks
from graspbench.synth import (
    perfect_predictions,
    synthetic_annotations,
    write_synthetic_dataset,
)


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory):
    """Synthetic dataset written to disk once per session."""
    root = tmp_path_factory.mktemp("synthetic")
    write_synthetic_dataset(root)
    return root


@pytest.fixture(scope="session")
def annotations():
    return synthetic_annotations()


@pytest.fixture(scope="session")
def train_annotations(annotations):
    return [a for a in annotations if a.split is Split.TRAIN]


@pytest.fixture(scope="session")
def test_annotations(annotations):
    return [a for a in annotations
            if a.split in (Split.PUBLIC_TEST, Split.PRIVATE_TEST)]


@pytest.fixture(scope="session")
def densities(train_annotations):
    return build_density_table(train_annotations)


@pytest.fixture(scope="session")
def tracks(dataset_dir, annotations):
    return load_pose_tracks(annotations, dataset_dir)


@pytest.fixture(scope="session")
def perfect(test_annotations):
    return perfect_predictions(test_annotations)
