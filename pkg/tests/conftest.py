import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from coda.loader import load_model, shipped_model_path  # noqa: E402
from coda.runner import parse_scenario_file  # noqa: E402

MODEL_NAMES = ["wm0", "wm1", "wm2", "wm2_flawed", "wm3", "wm4", "io0", "io1"]
SCENARIOS = {
    "wm1": "wm1_start.scn",
    "wm2": "wm2_run.scn",
    "wm3": "wm3_run.scn",
    "wm4": "wm4_quick.scn",
    "io1": "io_powerup.scn",
    "io0": "io0_powerup.scn",
}


def model_path(name):
    return shipped_model_path(f"{name}.coda")


def scenario_for(name):
    return parse_scenario_file(shipped_model_path(SCENARIOS[name]))


@pytest.fixture(scope="session")
def models():
    return {name: load_model(model_path(name)) for name in MODEL_NAMES}


@pytest.fixture()
def wm1(models):
    return models["wm1"]


@pytest.fixture()
def wm2(models):
    return models["wm2"]
