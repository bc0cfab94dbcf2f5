"""Closed-form performance model: SE lower bound, ASE, AEC and EE.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math

from .errors import InvalidParameterError
from .params import DesignPoint, EvaluationResult, HardwareProfile, PropagationParams


def gamma_function(x: float) -> float:
    """Gamma function via ``exp(lgamma(x))`` for positive arguments.

    Arguments used by this package stay in roughly [1, 20] where the
    relative error is below 1e-12.
    """
    if not x > 0:
        raise InvalidParameterError(f"gamma_function needs x > 0, got {x}")
    return math.exp(math.lgamma(x))


def mean_distance_moment(lam: float, nu: float) -> float:
    """E{d^nu} for the distance from the origin to the nearest point of a
    homogeneous PPP with intensity ``lam``.

    The nearest distance is Rayleigh with scale 1/sqrt(2*pi*lam), which
    gives ``Gamma(nu/2 + 1) / (pi*lam)**(nu/2)`` for ``nu > -2``.
    """
    if not nu > -2:
        raise InvalidParameterError(f"moment order must exceed -2, got {nu}")
    if not lam > 0:
        raise InvalidParameterError(f"density must be positive, got {lam}")
    return gamma_function(nu / 2 + 1) / (math.pi * lam) ** (nu / 2)


def conditional_interference_mean(lam: float, alpha: float, d0: float) -> float:
    """Expected sum of d**-alpha over PPP points farther away than ``d0``."""
    if not alpha > 2:
        raise InvalidParameterError(f"alpha must exceed 2, got {alpha}")
    if not d0 > 0:
        raise InvalidParameterError(f"d0 must be positive, got {d0}")
    return 2 * math.pi * lam * d0 ** (2 - alpha) / (alpha - 2)


def noise_term(p: PropagationParams, lam: float) -> float:
    """omega * sigma2 * E{d0^alpha}, the average inverse channel gain times
    the noise energy.  Divided by rho it is the noise part of the bound."""
    return p.omega * p.sigma2 * mean_distance_moment(lam, p.alpha)


def se_lower_bound(p: PropagationParams, d: DesignPoint) -> float:
    """Achievable lower bound on the average SE [bit/symbol/user] with ZF."""
    M, K = d.M, d.K
    if not M > K:
        raise InvalidParameterError(f"need M > K, got M={M}, K={K}")
    if not d.rho > 0:
        raise InvalidParameterError(f"rho must be positive, got {d.rho}")
    eps2 = p.epsilon**2
    denominator = 2 * K / (p.alpha - 2) + eps2 * (M - K) + noise_term(p, d.lam) / d.rho
    return math.log1p((1 - eps2) * (M - K) / denominator) / math.log(2)


def se_limit_high_power(p: PropagationParams, M: float, K: float) -> float:
    """Limit of ``se_lower_bound`` as rho grows without bound."""
    eps2 = p.epsilon**2
    return math.log2(1 + (1 - eps2) * (M - K) / (2 * K / (p.alpha - 2) + eps2 * (M - K)))


def area_spectral_efficiency(lam: float, K: float, se: float) -> float:
    if lam < 0 or K < 1 or se < 0:
        raise InvalidParameterError("need lam >= 0, K >= 1 and se >= 0")
    return lam * K * se


def energy_per_ap(h: HardwareProfile, d: DesignPoint) -> float:
    """Radiated plus circuit energy of one AP [J/symbol], excluding coding."""
    M, K = d.M, d.K
    return K * d.rho / h.eta + h.C0 + h.C1 * K + h.D0 * M + h.D1 * M * K


def area_energy_consumption(h: HardwareProfile, d: DesignPoint, se: float) -> float:
    """Area energy consumption [J/symbol/m^2].

    ``h.A`` is in J/bit, so ``h.A * ASE`` is already J/symbol/m^2.
    """
    return d.lam * energy_per_ap(h, d) + h.A * area_spectral_efficiency(d.lam, d.K, se)


def ee_from_se(h: HardwareProfile, d: DesignPoint, se: float) -> float:
    """ASE/AEC for an externally supplied SE value."""
    aec = area_energy_consumption(h, d, se)
    if aec <= 0:
        return math.inf if se > 0 else 0.0
    return area_spectral_efficiency(d.lam, d.K, se) / aec


def energy_efficiency(p: PropagationParams, h: HardwareProfile, d: DesignPoint) -> float:
    """Lower bound on the network EE [bit/Joule]."""
    return ee_from_se(h, d, se_lower_bound(p, d))


def evaluate(p: PropagationParams, h: HardwareProfile, d: DesignPoint) -> EvaluationResult:
    se = se_lower_bound(p, d)
    ase = area_spectral_efficiency(d.lam, d.K, se)
    aec = area_energy_consumption(h, d, se)
    return EvaluationResult(
        se_bound=se,
        ase=ase,
        aec=aec,
        ee=ase / aec if aec > 0 else math.inf,
        feasible=True,
    )


def ee_density_limit(h: HardwareProfile, M: float, K: float, gamma: float) -> float:
    """EE as the AP density grows without bound while SE = gamma is kept:
    the radiated energy vanishes and only circuit and coding costs remain."""
    denominator = h.C0 + h.C1 * K + h.D0 * M + h.D1 * M * K + h.A * K * gamma
    if denominator <= 0:
        return math.inf if gamma > 0 else 0.0
    return K * gamma / denominator


def feasibility_gamma_bound(epsilon: float) -> float:
    """Largest SE target any design can reach at impairment level ``epsilon``
    (exclusive); infinite without impairments."""
    if not 0 <= epsilon < 1:
        raise InvalidParameterError(f"epsilon must lie in [0, 1), got {epsilon}")
    if epsilon == 0:
        return math.inf
    return -2 * math.log2(epsilon)


def sinr_factor(gamma: float, epsilon: float) -> float:
    """(2^gamma - 1) / (1 - 2^gamma eps^2): the SINR-like factor that appears
    in every closed-form optimum for an SE target ``gamma``."""
    bound = feasibility_gamma_bound(epsilon)
    if not 0 <= gamma < bound:
        raise InvalidParameterError(
            f"gamma={gamma} is not below the hardware-impairment limit "
            f"-2*log2(epsilon)={bound:.6g}"
        )
    g = 2.0**gamma
    return (g - 1) / (1 - g * epsilon**2)
