import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("hypspec", deadline=None, max_examples=60)
settings.load_profile("hypspec")


@pytest.fixture(scope="session")
def bolza():
    from hypspec.fuchsian import bundled_surface_path, load_surface_spec
    return load_surface_spec(bundled_surface_path())


@pytest.fixture(scope="session")
def table():
    from hypspec.volumes import load_volume_table
    return load_volume_table()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
