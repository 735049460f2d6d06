import os
import sys

import pytest

from nora_stabilizer.utils import make_rng


TEST_DIRECTORY = os.path.dirname(__file__)

SRC_DIRECTORY = os.path.join(os.path.dirname(TEST_DIRECTORY), "nora_stabilizer")
ROOT_DIR = os.path.dirname(SRC_DIRECTORY)

sys.path.insert(0, ROOT_DIR)
sys.path.insert(1, TEST_DIRECTORY)


DATA_INPUTS_DIRECTORY = os.path.join(TEST_DIRECTORY, "data_inputs")


@pytest.fixture
def rng():
    return make_rng(20240611)


@pytest.fixture
def output_directory(tmp_path):
    directory = tmp_path / "output"
    directory.mkdir()
    return str(directory)
