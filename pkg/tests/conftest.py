import pytest

from src.groups.core import subgroup_generated
from src.groups.presets import build_group


@pytest.fixture
def s3():
    return build_group("S3")


@pytest.fixture
def q8():
    return build_group("Q8")


@pytest.fixture
def z2():
    return build_group("Z/2")


@pytest.fixture
def z3():
    return build_group("Z/3")


@pytest.fixture
def transposition_subgroup(s3):
    # Element 1 of S3 is the transposition (1 2)
    return subgroup_generated(s3, [1])


@pytest.fixture
def a3(s3):
    return subgroup_generated(s3, [3])


@pytest.fixture
def tmp_out(tmp_path):
    return str(tmp_path / "report.json")
