"""Parameter containers for the propagation environment, hardware and design.

Units
-----
All energies are carried per symbol (Joule/symbol).  Powers in Watt only
appear at the I/O boundary and are converted with the symbol time ``S``:
``energy = power * S``.  The coding/backhaul coefficient ``A`` is stored in
Joule/bit; multiplying it by an area spectral efficiency in
bit/symbol/m^2 gives Joule/symbol/m^2, the same unit as every other term of
the area energy consumption.  Table values quoted in J/Gbit are scaled by
exactly 1e-9 on the way in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidParameterError

JOULE_PER_GBIT = 1e-9


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class PropagationParams:
    """Pathloss, noise and hardware-impairment environment.

    Attributes:
        alpha: pathloss exponent, must exceed 2.
        omega: fixed propagation loss on a linear scale.
        sigma2: receiver noise energy per symbol [J/symbol].
        epsilon: hardware impairment level (EVM proxy), in [0, 1).
    """

    alpha: float
    omega: float
    sigma2: float
    epsilon: float

    def __post_init__(self):
        if not self.alpha > 2:
            raise InvalidParameterError(f"alpha must exceed 2, got {self.alpha}")
        if not self.omega > 0:
            raise InvalidParameterError(f"omega must be positive, got {self.omega}")
        if not self.sigma2 >= 0:
            raise InvalidParameterError(f"sigma2 must be non-negative, got {self.sigma2}")
        if not 0 <= self.epsilon < 1:
            raise InvalidParameterError(f"epsilon must lie in [0, 1), got {self.epsilon}")

    @classmethod
    def from_db(cls, alpha, omega_db, sigma2, epsilon) -> "PropagationParams":
        return cls(alpha=alpha, omega=db_to_linear(omega_db), sigma2=sigma2, epsilon=epsilon)


@dataclass(frozen=True)
class HardwareProfile:
    """Circuit and amplifier energy model, per-symbol units.

    ``A`` is in Joule/bit, ``C0, C1, D0, D1`` in Joule/symbol and ``S`` is
    the symbol time in seconds/symbol.
    """

    eta: float
    A: float
    C0: float
    C1: float
    D0: float
    D1: float
    S: float

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise InvalidParameterError(f"eta must lie in (0, 1], got {self.eta}")
        for name in ("A", "C0", "C1", "D0", "D1", "S"):
            if not getattr(self, name) >= 0:
                raise InvalidParameterError(f"{name} must be non-negative")

    @classmethod
    def from_watts(
        cls,
        eta,
        A_joule_per_gbit,
        C0_watt,
        C1_watt,
        D0_watt,
        D1_joule_per_symbol,
        symbol_time,
    ) -> "HardwareProfile":
        S = symbol_time
        return cls(
            eta=eta,
            A=A_joule_per_gbit * JOULE_PER_GBIT,
            C0=C0_watt * S,
            C1=C1_watt * S,
            D0=D0_watt * S,
            D1=D1_joule_per_symbol,
            S=S,
        )


@dataclass(frozen=True)
class DesignPoint:
    """The four decision variables: energy per symbol per UE, AP density,
    antennas per AP and active UEs per AP.

    ``M`` and ``K`` are normally integers; real values are accepted so the
    relaxed problem can be evaluated with the same code.
    """

    rho: float
    lam: float
    M: float
    K: float

    def __post_init__(self):
        if not self.rho >= 0:
            raise InvalidParameterError(f"rho must be non-negative, got {self.rho}")
        if not self.lam > 0:
            raise InvalidParameterError(f"AP density must be positive, got {self.lam}")
        if not self.K >= 1:
            raise InvalidParameterError(f"K must be at least 1, got {self.K}")
        if not self.M >= self.K + 1:
            raise InvalidParameterError(
                f"zero-forcing needs M >= K + 1, got M={self.M}, K={self.K}"
            )


@dataclass(frozen=True)
class Constraint:
    gamma: float
    lambda_max: float
    mu: Optional[float] = None

    def __post_init__(self):
        if not self.gamma >= 0:
            raise InvalidParameterError(f"gamma must be non-negative, got {self.gamma}")
        if not self.lambda_max > 0:
            raise InvalidParameterError("lambda_max must be positive")
        if self.mu is not None and not self.mu > 0:
            raise InvalidParameterError("mu must be positive when given")


@dataclass(frozen=True)
class EvaluationResult:
    se_bound: float  # bit/symbol/user
    ase: float  # bit/symbol/m^2
    aec: float  # J/symbol/m^2
    ee: float  # bit/J
    feasible: bool


# Reference values of the simulation parameter table.
TABLE1_SYMBOL_TIME = 1.0 / 2e7

TABLE1_PROPAGATION = PropagationParams.from_db(
    alpha=3.76, omega_db=35.0, sigma2=1e-20, epsilon=0.05
)

TABLE1_HARDWARE = HardwareProfile.from_watts(
    eta=0.39,
    A_joule_per_gbit=1.15,
    C0_watt=10.0,
    C1_watt=0.1,
    D0_watt=1.0,
    D1_joule_per_symbol=1.56e-10,
    symbol_time=TABLE1_SYMBOL_TIME,
)
