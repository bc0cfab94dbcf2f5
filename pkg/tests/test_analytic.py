import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eedesign.analytic import (
    area_energy_consumption,
    area_spectral_efficiency,
    conditional_interference_mean,
    ee_density_limit,
    ee_from_se,
    energy_efficiency,
    evaluate,
    feasibility_gamma_bound,
    gamma_function,
    mean_distance_moment,
    noise_term,
    se_limit_high_power,
    se_lower_bound,
    sinr_factor,
)
from eedesign.errors import InvalidParameterError
from eedesign.optimizer import rho_star
from eedesign.params import DesignPoint, HardwareProfile, PropagationParams

mp.mp.dps = 40


# -- high-precision oracles ---------------------------------------------------


def mp_se(alpha, omega, sigma2, eps, M, K, lam, rho):
    alpha, omega, sigma2, eps, lam, rho = map(mp.mpf, (alpha, omega, sigma2, eps, lam, rho))
    moment = mp.gamma(alpha / 2 + 1) / (mp.pi * lam) ** (alpha / 2)
    num = (1 - eps**2) * (M - K)
    den = 2 * K / (alpha - 2) + eps**2 * (M - K) + moment * omega * sigma2 / rho
    return mp.log(1 + num / den, 2)


def mp_aec(h, M, K, lam, rho, se):
    lam, rho, se = map(mp.mpf, (lam, rho, se))
    per_ap = K * rho / mp.mpf(h.eta) + h.C0 + h.C1 * K + h.D0 * M + h.D1 * M * K
    return lam * per_ap + mp.mpf(h.A) * lam * K * se


def ppp_nearest_sq(lam, R, trials, rng):
    """Squared nearest-point distance in a disc window, independent sampler."""
    counts = rng.poisson(lam * math.pi * R * R, size=trials)
    out = np.empty(trials)
    for t, n in enumerate(counts):
        r2 = R * R * rng.random(max(n, 1))
        out[t] = r2.min() if n else R * R
    return out


# -- se_lower_bound ------------------------------------------------------------


def test_se_matches_high_precision(p):
    d = DesignPoint(rho=1e-12, lam=1e-4, M=100, K=10)
    oracle = mp_se(3.76, 10**3.5, 1e-20, 0.05, 100, 10, 1e-4, 1e-12)
    assert se_lower_bound(p, d) == pytest.approx(float(oracle), rel=1e-13)


def test_se_reaches_target_at_golden_design(p):
    rho = rho_star(p, 3.0, 1e-4, 193, 21)
    assert se_lower_bound(p, DesignPoint(rho, 1e-4, 193, 21)) == pytest.approx(3.0, rel=1e-12)


def test_se_limit_without_impairments():
    q = PropagationParams(alpha=3.76, omega=1e3, sigma2=1e-20, epsilon=0.0)
    M, K = 50, 7
    expected = math.log2(1 + (M - K) * (q.alpha - 2) / (2 * K))
    assert se_limit_high_power(q, M, K) == pytest.approx(expected, rel=1e-14)
    big = se_lower_bound(q, DesignPoint(rho=1e10, lam=1e-4, M=M, K=K))
    assert big == pytest.approx(expected, rel=1e-9)


def test_se_rejects_bad_inputs(p):
    with pytest.raises(InvalidParameterError):
        se_lower_bound(p, DesignPoint(rho=0.0, lam=1e-4, M=10, K=2))


# -- ASE / AEC / EE ------------------------------------------------------------


def test_ase():
    assert area_spectral_efficiency(1e-4, 20, 3) == pytest.approx(6e-3, rel=1e-15)
    assert area_spectral_efficiency(1e-4, 21, 3) == pytest.approx(6.3e-3, rel=1e-15)
    assert area_spectral_efficiency(1e-300, 5, 2) == pytest.approx(0.0, abs=1e-290)


def test_aec_circuit_only():
    h = HardwareProfile(eta=0.5, A=0.0, C0=3.0, C1=0.2, D0=0.7, D1=0.05, S=1.0)
    d = DesignPoint(rho=0.0, lam=2e-4, M=2, K=1)
    expected = 2e-4 * (3.0 + 0.2 + 2 * 0.7 + 2 * 0.05)
    assert area_energy_consumption(h, d, se=1.5) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("rho", np.geomspace(1e-14, 1e-8, 13))
def test_aec_curve_matches_high_precision(p, h, rho):
    d = DesignPoint(rho=float(rho), lam=1e-4, M=10, K=1)
    se = se_lower_bound(p, d)
    oracle = mp_aec(h, 10, 1, 1e-4, rho, mp_se(3.76, 10**3.5, 1e-20, 0.05, 10, 1, 1e-4, rho))
    assert area_energy_consumption(h, d, se) == pytest.approx(float(oracle), rel=1e-13)


def test_golden_ee(p, h):
    rho = rho_star(p, 3.0, 1e-4, 193, 21)
    ee = energy_efficiency(p, h, DesignPoint(rho, 1e-4, 193, 21))
    assert ee / 1e6 == pytest.approx(5.72, abs=0.01)


def test_ee_vanishes_with_huge_circuit_cost(p):
    d = DesignPoint(rho=1e-12, lam=1e-4, M=50, K=5)
    for D0 in (1e3, 1e6, 1e12):
        h = HardwareProfile(eta=0.4, A=1e-9, C0=0, C1=0, D0=D0, D1=0, S=5e-8)
        ee = energy_efficiency(p, h, d)
    assert ee < 1e-10


def test_evaluate_is_consistent(p, h):
    d = DesignPoint(rho=2e-12, lam=3e-4, M=64, K=8)
    r = evaluate(p, h, d)
    assert r.feasible
    assert r.ee == pytest.approx(r.ase / r.aec, rel=1e-15)
    assert r.ee == pytest.approx(energy_efficiency(p, h, d), rel=1e-15)


def test_dimension_audit(p, h):
    """bit/symbol/m^2 over J/symbol/m^2 lands in the Mbit/Joule range."""
    for lam in (1e-6, 1e-4, 1e-2):
        rho = rho_star(p, 3.0, lam, 193, 21)
        r = evaluate(p, h, DesignPoint(rho, lam, 193, 21))
        assert 1e5 < r.ase / r.aec < 1e8


# -- density limit and feasibility bound --------------------------------------


def test_density_limit_above_and_approached(p, h):
    limit = ee_density_limit(h, 193, 21, 3.0)
    values = [
        energy_efficiency(p, h, DesignPoint(rho_star(p, 3.0, lam, 193, 21), lam, 193, 21))
        for lam in np.geomspace(1e-6, 1e2, 30)
    ]
    assert all(v < limit for v in values)
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(limit, rel=1e-6)


def test_density_limit_trivial_cases(h):
    only_coding = HardwareProfile(eta=0.4, A=2e-9, C0=0, C1=0, D0=0, D1=0, S=1)
    assert ee_density_limit(only_coding, 2, 1, 3.0) == pytest.approx(1 / 2e-9, rel=1e-15)
    assert ee_density_limit(h, 193, 21, 0.0) == 0.0


def test_feasibility_bound():
    assert feasibility_gamma_bound(0.05) == pytest.approx(float(-2 * mp.log(mp.mpf("0.05"), 2)), rel=1e-15)
    assert feasibility_gamma_bound(0.05) == pytest.approx(8.6439, abs=5e-5)
    assert feasibility_gamma_bound(0.5) == 2.0
    near_one = feasibility_gamma_bound(1 - 1e-12)
    assert 0 < near_one < 1e-10
    assert feasibility_gamma_bound(0.0) == math.inf


def test_sinr_factor_rejects_beyond_bound():
    with pytest.raises(InvalidParameterError, match="log2"):
        sinr_factor(9.0, 0.05)
    assert sinr_factor(0.0, 0.05) == 0.0


# -- distance moments ---------------------------------------------------------


def test_gamma_function_against_mpmath():
    for x in (0.5, 1.0, 2.88, 3.5, 17.25):
        assert gamma_function(x) == pytest.approx(float(mp.gamma(x)), rel=1e-13)


def test_distance_moment_closed_cases():
    assert mean_distance_moment(1 / math.pi, 2) == pytest.approx(1.0, rel=1e-15)
    assert mean_distance_moment(1e-4, 2) == pytest.approx(3183.0988618, rel=1e-10)
    expected = float(mp.gamma(2.88) / (mp.pi * mp.mpf("1e-4")) ** mp.mpf("1.88"))
    assert mean_distance_moment(1e-4, 3.76) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(InvalidParameterError):
        mean_distance_moment(1e-4, -2)


@pytest.mark.parametrize("nu", [2.0, 3.76])
def test_distance_moment_against_ppp_simulation(nu):
    lam, R, n = 1e-4, 500.0, 20_000
    rng = np.random.default_rng(11)
    samples = ppp_nearest_sq(lam, R, n, rng) ** (nu / 2)
    mean, hw = samples.mean(), 1.96 * samples.std(ddof=1) / math.sqrt(n)
    # window truncation at 500 m leaves exp(-pi lam R^2) ~ 4e-35 probability mass
    assert abs(mean - mean_distance_moment(lam, nu)) < 1.5 * hw


def test_conditional_interference_closed_cases():
    assert conditional_interference_mean(1 / (2 * math.pi), 4, 1) == pytest.approx(0.5, rel=1e-15)
    assert conditional_interference_mean(1e-4, 3.76, 1e12) < 1e-20
    with pytest.raises(InvalidParameterError):
        conditional_interference_mean(1e-4, 2.0, 10)


def test_conditional_interference_against_ppp_simulation():
    """Sum of d^-alpha over PPP points in the annulus [50, R], 1e5 trials."""
    lam, alpha, d0, R = 1e-4, 3.76, 50.0, 1000.0
    trials, chunk = 100_000, 10_000
    rng = np.random.default_rng(5)
    sums = []
    area = math.pi * (R * R - d0 * d0)
    for _ in range(trials // chunk):
        counts = rng.poisson(lam * area, size=chunk)
        r = np.sqrt(d0 * d0 + (R * R - d0 * d0) * rng.random(counts.sum()))
        owner = np.repeat(np.arange(chunk), counts)
        sums.append(np.bincount(owner, weights=r**-alpha, minlength=chunk))
    s = np.concatenate(sums)
    target = conditional_interference_mean(lam, alpha, d0) - conditional_interference_mean(lam, alpha, R)
    hw = 1.96 * s.std(ddof=1) / math.sqrt(trials)
    assert abs(s.mean() - target) < 1.5 * hw


# -- properties -----------------------------------------------------------------

params = st.builds(
    PropagationParams,
    alpha=st.floats(2.2, 5.0),
    omega=st.floats(1.0, 1e5),
    sigma2=st.floats(1e-22, 1e-18),
    epsilon=st.floats(0.0, 0.2),
)
densities = st.floats(1e-7, 1e-1)
rhos = st.floats(1e-15, 1e-8)


@settings(max_examples=200, deadline=None)
@given(params, st.integers(1, 40), st.integers(1, 200), densities, st.floats(-4, 4), st.floats(1.01, 10.0))
def test_se_strictly_increasing(q, K, extra, lam, log_snr, factor):
    # rho placed so the noise term is within 1e4 of the interference term;
    # far outside that band the increments fall below double resolution
    M = K + extra
    rho = noise_term(q, lam) / (10**log_snr * 2 * K / (q.alpha - 2))
    base = se_lower_bound(q, DesignPoint(rho, lam, M, K))
    assert se_lower_bound(q, DesignPoint(rho * factor, lam, M, K)) > base
    assert se_lower_bound(q, DesignPoint(rho, lam * factor, M, K)) > base
    assert se_lower_bound(q, DesignPoint(rho, lam, M + 1, K)) > base


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 40), st.integers(1, 200), rhos, st.floats(0.0, 10.0), densities, densities)
def test_lambda_cancels_for_fixed_se(K, extra, rho, se, lam1, lam2):
    from eedesign.params import TABLE1_HARDWARE as h

    e1 = ee_from_se(h, DesignPoint(rho, lam1, K + extra, K), se)
    e2 = ee_from_se(h, DesignPoint(rho, lam2, K + extra, K), se)
    assert e1 == pytest.approx(e2, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(params, st.floats(0.05, 1.0), st.integers(1, 30), st.floats(1.05, 4.0), densities)
def test_rho_star_reproduces_target(q, frac, K, stretch, lam):
    gamma = frac * min(feasibility_gamma_bound(q.epsilon), 8.0) * 0.95
    c = sinr_factor(gamma, q.epsilon)
    M = math.ceil((K + 2 * K * c / (q.alpha - 2)) * stretch) + 1
    rho = rho_star(q, gamma, lam, M, K)
    assert se_lower_bound(q, DesignPoint(rho, lam, M, K)) == pytest.approx(gamma, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 6.0), st.integers(1, 30), st.floats(1.1, 3.0))
def test_ee_nondecreasing_in_density(gamma, K, stretch):
    from eedesign.params import TABLE1_HARDWARE as h, TABLE1_PROPAGATION as q

    c = sinr_factor(gamma, q.epsilon)
    M = math.ceil((K + 2 * K * c / (q.alpha - 2)) * stretch) + 1
    values = [
        energy_efficiency(q, h, DesignPoint(rho_star(q, gamma, lam, M, K), lam, M, K))
        for lam in np.geomspace(1e-7, 1e-1, 25)
    ]
    limit = ee_density_limit(h, M, K, gamma)
    assert all(b >= a * (1 - 1e-12) for a, b in zip(values, values[1:]))
    assert all(v <= limit * (1 + 1e-12) for v in values)
