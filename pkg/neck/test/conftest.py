import pytest

from neck.neck_assembly import build_neck
from neck.spectrum import DPoint, torus_spectrum


@pytest.fixture(scope="session")
def torus():
    return torus_spectrum(2, DPoint(0.0, 0.0))


@pytest.fixture(scope="session")
def small_neck(torus):
    """T = 10 with the eigenvalue groups 0, 1 and sqrt 2."""
    return build_neck(torus, 10.0, 0, -1, lambda_max=1.5)


@pytest.fixture(scope="session")
def zero_mode_neck(torus):
    return build_neck(torus, 25.0, 0, -1, lambda_max=0.0)


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Run inside tmp_path so log files land in tmp_path/data/logs."""
    monkeypatch.chdir(tmp_path)
    return tmp_path
