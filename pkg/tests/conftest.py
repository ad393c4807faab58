import sys
import os

# Add src directory to Python path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

import json

import pytest

from slgreen.cli.examples import EXAMPLES, example_config


@pytest.fixture(scope="session")
def config_d():
    return example_config("D")


@pytest.fixture(scope="session")
def config_p():
    return example_config("P")


@pytest.fixture(scope="session")
def config_e():
    return example_config("E")


@pytest.fixture
def config_file(tmp_path):
    """Write a built-in example (optionally patched) to a JSON file and return its path."""
    def write(name, **overrides):
        data = json.loads(json.dumps(EXAMPLES[name]))
        data.update(overrides)
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return path
    return write
