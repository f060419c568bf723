import os

import pytest
from hypothesis import settings

settings.register_profile("thermoflat", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("thermoflat")


def pytest_addoption(parser):
    parser.addoption(
        "--run-expensive",
        action="store_true",
        default=bool(os.environ.get("THERMOFLAT_RUN_EXPENSIVE")),
        help="also run full-size extended-precision checks",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-expensive"):
        return
    skip = pytest.mark.skip(reason="expensive; pass --run-expensive to include")
    for item in items:
        if "expensive" in item.keywords:
            item.add_marker(skip)
