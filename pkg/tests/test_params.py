import math

import pytest

from eedesign.errors import InvalidParameterError
from eedesign.params import (
    TABLE1_HARDWARE,
    TABLE1_PROPAGATION,
    Constraint,
    DesignPoint,
    HardwareProfile,
    PropagationParams,
    db_to_linear,
    linear_to_db,
)


def test_db_round_trip():
    assert db_to_linear(35) == pytest.approx(10**3.5, rel=1e-15)
    assert linear_to_db(db_to_linear(12.5)) == pytest.approx(12.5, rel=1e-14)


def test_table1_units():
    h = TABLE1_HARDWARE
    S = 5e-8
    assert h.C0 == pytest.approx(10 * S)
    assert h.C1 == pytest.approx(0.1 * S)
    assert h.D0 == pytest.approx(1 * S)
    assert h.D1 == pytest.approx(1.56e-10)
    assert h.A == pytest.approx(1.15e-9)
    assert TABLE1_PROPAGATION.omega == pytest.approx(10**3.5)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(alpha=2.0, omega=1.0, sigma2=1.0, epsilon=0.0),
        dict(alpha=3.0, omega=0.0, sigma2=1.0, epsilon=0.0),
        dict(alpha=3.0, omega=1.0, sigma2=-1.0, epsilon=0.0),
        dict(alpha=3.0, omega=1.0, sigma2=1.0, epsilon=1.0),
    ],
)
def test_propagation_rejects(kwargs):
    with pytest.raises(InvalidParameterError):
        PropagationParams(**kwargs)


def test_hardware_rejects_bad_eta():
    with pytest.raises(InvalidParameterError):
        HardwareProfile(eta=0, A=0, C0=0, C1=0, D0=0, D1=0, S=1)
    with pytest.raises(InvalidParameterError):
        HardwareProfile(eta=0.5, A=-1, C0=0, C1=0, D0=0, D1=0, S=1)


def test_design_point_checks():
    DesignPoint(rho=0.0, lam=1e-4, M=2, K=1)
    for bad in (
        dict(rho=-1, lam=1e-4, M=10, K=1),
        dict(rho=1, lam=0, M=10, K=1),
        dict(rho=1, lam=1e-4, M=10, K=0),
        dict(rho=1, lam=1e-4, M=5, K=5),
    ):
        with pytest.raises(InvalidParameterError):
            DesignPoint(**bad)


def test_constraint_checks():
    assert Constraint(gamma=3, lambda_max=1e-4).mu is None
    with pytest.raises(InvalidParameterError):
        Constraint(gamma=-1, lambda_max=1e-4)
    with pytest.raises(InvalidParameterError):
        Constraint(gamma=1, lambda_max=1e-4, mu=0)
    assert math.isfinite(Constraint(gamma=1, lambda_max=1, mu=0.5).mu)
