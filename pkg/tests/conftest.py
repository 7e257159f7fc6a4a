import pytest

from ache_lab.curvature import CurvatureModel, ch2_metric, frame_brackets
from ache_lab.filling import approximate_ke_metric
from ache_lab.renorm import CollarGeometry
from ache_lab.structures import heisenberg, s3_standard, su2_torsion

TORSION_A = 0.3 - 0.2j


@pytest.fixture(scope="session")
def s3():
    return s3_standard()


@pytest.fixture(scope="session")
def heis():
    return heisenberg()


@pytest.fixture(scope="session")
def torsion_struct():
    return su2_torsion(TORSION_A)


@pytest.fixture(scope="session")
def ch2_model(s3):
    cap = 56
    return CurvatureModel(ch2_metric(cap=cap), frame_brackets(s3, cap=cap))


@pytest.fixture(scope="session")
def ch2_geometry(ch2_model, s3):
    return CollarGeometry(ch2_model, s3.total_volume)


def _gbar_model(s, cap=12):
    g = approximate_ke_metric(s, cap=cap)
    return CurvatureModel(g, frame_brackets(s, cap=cap))


@pytest.fixture(scope="session")
def gbar_s3_model(s3):
    return _gbar_model(s3)


@pytest.fixture(scope="session")
def gbar_torsion_model(torsion_struct):
    return _gbar_model(torsion_struct)


@pytest.fixture(scope="session")
def gbar_heis_model(heis):
    return _gbar_model(heis)


@pytest.fixture(scope="session")
def gbar_s3_geometry(gbar_s3_model, s3):
    return CollarGeometry(gbar_s3_model, s3.total_volume)


@pytest.fixture(scope="session")
def gbar_torsion_geometry(gbar_torsion_model, torsion_struct):
    return CollarGeometry(gbar_torsion_model, torsion_struct.total_volume)
