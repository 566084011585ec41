import functools
import pathlib
import sys

import pytest

HERE = pathlib.Path(__file__).resolve().parent
FIXTURES = HERE.parent / "fixtures"
FIXTURE_NAMES = ("example1", "example2", "example3", "hyperbola", "orthant")

sys.path.insert(0, str(HERE))


def fixture_path(name: str) -> str:
    return str(FIXTURES / f"{name}.problem")


@functools.lru_cache(maxsize=None)
def hybrid_report(name: str):
    """One default hybrid run per fixture, shared by every test module."""
    from tangent_inf.pipeline import RunConfig, run

    return run(RunConfig(input=fixture_path(name)))


@pytest.fixture(scope="session")
def reports():
    return hybrid_report
