"""Monte-Carlo estimate of the ergodic downlink SE of a typical UE.

APs form a homogeneous PPP restricted to a disc of radius R around the
typical UE at the origin; the nearest AP serves it.  Channels are Rayleigh
with per-antenna variance 1/(omega d^alpha), every AP runs normalized
zero-forcing for K UEs and the hardware distortion enters the SINR through
its conditional variance.

Random numbers come from counter-based Philox streams keyed by
(master_seed, stream kind, trial index, ...), so a trial produces the same
numbers whichever worker runs it and in whatever order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import stats

from .analytic import conditional_interference_mean, mean_distance_moment
from .errors import InvalidParameterError
from .params import DesignPoint, PropagationParams

GEOMETRY_STREAM = 0
FADING_STREAM = 1
MOMENT_STREAM = 2

EXPLICIT_ZF = "explicit-zf"
DISTRIBUTIONAL = "distributional"
PRECODER_MODES = (EXPLICIT_ZF, DISTRIBUTIONAL)

Z95 = 1.959963984540054


def substream(master_seed: int, *ids: int) -> np.random.Generator:
    """Independent generator for the counter tuple ``ids`` under ``master_seed``."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(i) for i in ids))
    return np.random.Generator(np.random.Philox(seq))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-variance circularly-symmetric complex Gaussian samples."""
    shape = tuple(np.atleast_1d(shape))
    z = rng.standard_normal(shape + (2,)).view(np.complex128)[..., 0]
    z *= math.sqrt(0.5)
    return z


def reference_distance(lam: float) -> float:
    """Mean distance to the nearest AP."""
    return 0.5 / math.sqrt(lam)


def window_radius_for(lam: float, alpha: float, tail_fraction: float = 1e-3) -> float:
    """Smallest R whose interference tail beyond R is at most ``tail_fraction``
    of the in-window interference mean, for a UE at the mean serving distance."""
    if not 0 < tail_fraction < 1:
        raise InvalidParameterError("tail_fraction must lie in (0, 1)")
    d_ref = reference_distance(lam)
    return d_ref * ((1 + tail_fraction) / tail_fraction) ** (1 / (alpha - 2))


@dataclass(frozen=True)
class SimulationConfig:
    propagation: PropagationParams
    design: DesignPoint
    window_radius: float
    trials: int = 10_000
    fading_draws_per_geometry: int = 1
    master_seed: int = 0
    precoder_mode: str = DISTRIBUTIONAL
    interference: bool = True  # False keeps only the serving AP

    def __post_init__(self):
        if self.trials < 1:
            raise InvalidParameterError("trials must be at least 1")
        if self.fading_draws_per_geometry < 1:
            raise InvalidParameterError("fading_draws_per_geometry must be at least 1")
        if self.precoder_mode not in PRECODER_MODES:
            raise InvalidParameterError(f"unknown precoder mode {self.precoder_mode!r}")
        if not self.window_radius > 0:
            raise InvalidParameterError("window_radius must be positive")
        if not self.design.M >= self.design.K + 1:
            raise InvalidParameterError("zero-forcing needs M >= K + 1")

    @classmethod
    def with_tail_fraction(
        cls,
        propagation: PropagationParams,
        design: DesignPoint,
        tail_fraction: float = 1e-3,
        **kwargs,
    ) -> "SimulationConfig":
        radius = window_radius_for(design.lam, propagation.alpha, tail_fraction)
        return cls(propagation=propagation, design=design, window_radius=radius, **kwargs)

    @property
    def M(self) -> int:
        return int(self.design.M)

    @property
    def K(self) -> int:
        return int(self.design.K)

    def tail_fraction(self) -> float:
        """Interference tail beyond the window relative to the in-window mean,
        at the mean serving distance."""
        a, lam, R = self.propagation.alpha, self.design.lam, self.window_radius
        d_ref = reference_distance(lam)
        tail = conditional_interference_mean(lam, a, R)
        inside = conditional_interference_mean(lam, a, d_ref) - tail
        return tail / inside if inside > 0 else math.inf


@dataclass(frozen=True)
class GeometryRealization:
    serving_distance: float
    interferer_distances: np.ndarray
    resamples: int = 0  # empty windows redrawn before this one


@dataclass(frozen=True)
class McEstimate:
    mean: float
    half_width: float
    trials_used: int

    @classmethod
    def from_samples(cls, samples) -> "McEstimate":
        x = np.asarray(samples, dtype=float)
        n = x.size
        mean = math.fsum(x) / n
        if n < 2:
            return cls(mean=mean, half_width=math.inf, trials_used=n)
        var = math.fsum((x - mean) ** 2) / (n - 1)
        return cls(mean=mean, half_width=Z95 * math.sqrt(var) / math.sqrt(n), trials_used=n)

    def covers(self, value: float) -> bool:
        return abs(self.mean - value) <= self.half_width


# -- geometry -----------------------------------------------------------------


def sample_geometry(config: SimulationConfig, trial_seed: int) -> GeometryRealization:
    """PPP realization in the window; the nearest AP is the serving one.

    Empty windows are redrawn from the next sub-stream and counted.
    """
    lam, R = config.design.lam, config.window_radius
    mean_count = lam * math.pi * R * R
    attempt = 0
    while True:
        rng = substream(config.master_seed, GEOMETRY_STREAM, trial_seed, attempt)
        n = rng.poisson(mean_count)
        if n > 0:
            break
        attempt += 1
    r = R * np.sqrt(rng.random(n))
    i0 = int(np.argmin(r))
    return GeometryRealization(
        serving_distance=float(r[i0]),
        interferer_distances=np.delete(r, i0),
        resamples=attempt,
    )


# -- zero-forcing gains -------------------------------------------------------


def _gram_inverse(H: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Batched inverse of H^H H; second value flags singular batch entries."""
    G = np.conj(np.swapaxes(H, -1, -2)) @ H
    try:
        Ginv = np.linalg.inv(G)
        bad = ~np.all(np.isfinite(Ginv), axis=(-1, -2))
    except np.linalg.LinAlgError:
        Ginv = np.empty_like(G)
        bad = np.zeros(G.shape[0], dtype=bool)
        for i in range(G.shape[0]):
            try:
                Ginv[i] = np.linalg.inv(G[i])
            except np.linalg.LinAlgError:
                bad[i] = True
    diag = np.real(np.diagonal(Ginv, axis1=-2, axis2=-1))
    bad |= np.any(diag <= 0, axis=-1)
    return Ginv, bad


def _regular_channels(rng, n, M, K):
    """n independent M x K channel matrices with non-singular Gram matrices,
    their Gram inverses and the number of redrawn matrices."""
    H = complex_normal(rng, (n, M, K))
    Ginv, bad = _gram_inverse(H)
    redraws = 0
    while bad.any():
        idx = np.flatnonzero(bad)
        redraws += idx.size
        H[idx] = complex_normal(rng, (idx.size, M, K))
        Ginv[idx], bad_sub = _gram_inverse(H[idx])
        bad[:] = False
        bad[idx] = bad_sub
    return H, Ginv, redraws


def zf_desired_gains(rng: np.random.Generator, M: int, K: int, n: int) -> np.ndarray:
    """|h_k^H w_k|^2 for unit-variance channels and the normalized ZF column
    of UE k (k = 0), n independent draws.  Equals 1 / [(H^H H)^-1]_kk."""
    _, Ginv, _ = _regular_channels(rng, n, M, K)
    return 1.0 / np.real(Ginv[:, 0, 0])


def zf_leakage_gains(rng: np.random.Generator, M: int, K: int, n: int) -> np.ndarray:
    """||h^H W||^2 for a unit-variance channel h independent of the
    normalized ZF matrix W that another AP built for its own K UEs."""
    H, Ginv, _ = _regular_channels(rng, n, M, K)
    return _leakage(H, Ginv, complex_normal(rng, (n, M)))


def _leakage(H, Ginv, h):
    # h^H W with W = H Ginv diag(Ginv)^(-1/2)
    a = (np.conj(h)[:, None, :] @ H)[:, 0, :]
    b = (a[:, None, :] @ Ginv)[:, 0, :]
    col_norm2 = np.real(np.diagonal(Ginv, axis1=-2, axis2=-1))
    return np.sum(np.abs(b) ** 2 / col_norm2, axis=-1)


def _zf_moment_chunk(rng, M, K, n):
    """Desired gains and leakage gains from the same channel draws: each
    matrix serves once as the serving AP's channel and once as an
    interfering AP's precoder basis for an independent h."""
    H, Ginv, _ = _regular_channels(rng, n, M, K)
    desired = 1.0 / np.real(Ginv[:, 0, 0])
    return np.stack([desired, _leakage(H, Ginv, complex_normal(rng, (n, M)))])


def desired_gain_samples(rng: np.random.Generator, M: int, K: int, n: int, mode: str) -> np.ndarray:
    """Normalized desired-signal gains in either precoder mode."""
    if mode == EXPLICIT_ZF:
        return zf_desired_gains(rng, M, K, n)
    if mode == DISTRIBUTIONAL:
        return rng.gamma(M - K + 1, size=n)
    raise InvalidParameterError(f"unknown precoder mode {mode!r}")


def leakage_gain_samples(rng: np.random.Generator, M: int, K: int, n: int, mode: str) -> np.ndarray:
    """Normalized interferer leakage gains.

    The distributional mode uses a sum of K unit exponentials, exact for
    orthonormal precoder columns and matching the ZF conditional mean K.
    """
    if n == 0:
        return np.zeros(0)
    if mode == EXPLICIT_ZF:
        return zf_leakage_gains(rng, M, K, n)
    if mode == DISTRIBUTIONAL:
        return rng.gamma(K, size=n)
    raise InvalidParameterError(f"unknown precoder mode {mode!r}")


# -- SINR -----------------------------------------------------------------------


def _fading_rng(config: SimulationConfig, fading_seed) -> np.random.Generator:
    ids = fading_seed if isinstance(fading_seed, tuple) else (fading_seed,)
    return substream(config.master_seed, FADING_STREAM, *ids)


def simulate_sinr(
    config: SimulationConfig,
    geometry: GeometryRealization,
    fading_seed: Union[int, Tuple[int, ...]],
) -> float:
    """One fading realization of the typical UE's SINR.

    SINR = (1 - eps^2) G0 / (sum_i I_i + eps^2 G0 + sigma^2 / rho), with G0
    the desired gain and I_i the leakage from interferer i, both including
    pathloss.
    """
    p, d = config.propagation, config.design
    M, K = config.M, config.K
    rng = _fading_rng(config, fading_seed)

    g0 = desired_gain_samples(rng, M, K, 1, config.precoder_mode)[0]
    g0 /= p.omega * geometry.serving_distance**p.alpha

    interference = 0.0
    if config.interference and geometry.interferer_distances.size:
        dist = geometry.interferer_distances
        leak = leakage_gain_samples(rng, M, K, dist.size, config.precoder_mode)
        interference = math.fsum(leak / (p.omega * dist**p.alpha))

    if d.rho <= 0:
        return 0.0
    eps2 = p.epsilon**2
    denominator = interference + eps2 * g0 + p.sigma2 / d.rho
    if denominator <= 0:
        return math.inf
    return (1 - eps2) * g0 / denominator


def _trial_value(config: SimulationConfig, trial: int) -> float:
    geometry = sample_geometry(config, trial)
    F = config.fading_draws_per_geometry
    rates = [math.log2(1 + simulate_sinr(config, geometry, (trial, f))) for f in range(F)]
    return math.fsum(rates) / F


def _trial_block(args) -> np.ndarray:
    config, start, stop = args
    return np.array([_trial_value(config, t) for t in range(start, stop)])


def per_trial_se(config: SimulationConfig, workers: int = 1) -> np.ndarray:
    """Fading-averaged SE of every trial, ordered by trial index."""
    n = config.trials
    if workers <= 1 or n < 2:
        return _trial_block((config, 0, n))
    n_blocks = min(n, 4 * workers)
    edges = np.linspace(0, n, n_blocks + 1).astype(int)
    jobs = [(config, int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        blocks = list(pool.map(_trial_block, jobs))
    return np.concatenate(blocks)


def estimate_ergodic_se(config: SimulationConfig, workers: int = 1) -> McEstimate:
    """Mean of log2(1 + SINR) over geometries and fading.

    Each trial contributes its fading average; the confidence interval is
    taken over trials.  The result depends only on the config (including
    ``master_seed``), never on ``workers``.
    """
    return McEstimate.from_samples(per_trial_se(config, workers))


# -- moment identities --------------------------------------------------------


@dataclass
class MomentCheck:
    name: str
    estimate: McEstimate
    target: float
    passed: bool
    detail: str = ""


@dataclass
class MomentReport:
    checks: List[MomentCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> MomentCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _chunked(master_seed, key, draws, chunk, fn):
    out = []
    for i, start in enumerate(range(0, draws, chunk)):
        rng = substream(master_seed, MOMENT_STREAM, key, i)
        out.append(fn(rng, min(chunk, draws - start)))
    return np.concatenate(out, axis=-1)


def serving_distances(config: SimulationConfig, n: Optional[int] = None) -> np.ndarray:
    n = config.trials if n is None else n
    return np.array([sample_geometry(config, t).serving_distance for t in range(n)])


def rayleigh_ks(config: SimulationConfig, n: Optional[int] = None):
    """KS test of serving distances against Rayleigh(1/sqrt(2 pi lam))."""
    scale = 1 / math.sqrt(2 * math.pi * config.design.lam)
    return stats.kstest(serving_distances(config, n), "rayleigh", args=(0, scale))


def validate_moment_identities(
    config: SimulationConfig,
    draws: int = 1_000_000,
    distance: float = 100.0,
    geometries: Optional[int] = None,
    chunk: int = 10_000,
    ks_level: float = 0.01,
) -> MomentReport:
    """Compare simulated channel and geometry statistics with their closed forms.

    Channel checks use explicit ZF at a fixed distance; geometry checks use
    ``geometries`` (default ``config.trials``) sampled windows.  Mismatches
    are reported, never raised.
    """
    p, lam = config.propagation, config.design.lam
    M, K = config.M, config.K
    path_gain = 1 / (p.omega * distance**p.alpha)
    report = MomentReport()

    gains, leak = _chunked(
        config.master_seed, 0, draws, chunk, lambda r, n: _zf_moment_chunk(r, M, K, n)
    )
    est = McEstimate.from_samples(1 / gains)  # omega d^alpha / |h^H w|^2
    target = 1 / (M - K)
    report.checks.append(MomentCheck("inverse_desired_gain", est, target, est.covers(target)))

    est = McEstimate.from_samples(leak * path_gain)
    target = K * path_gain
    report.checks.append(MomentCheck("interferer_leakage", est, target, est.covers(target)))

    n_geo = config.trials if geometries is None else geometries
    geos = [sample_geometry(config, t) for t in range(n_geo)]
    d0 = np.array([g.serving_distance for g in geos])
    for nu, name in ((2.0, "distance_moment_2"), (p.alpha, "distance_moment_alpha")):
        est = McEstimate.from_samples(d0**nu)
        target = mean_distance_moment(lam, nu)
        report.checks.append(MomentCheck(name, est, target, est.covers(target)))

    # interference sum minus its conditional mean given d0, inside the window
    R = config.window_radius
    tail = conditional_interference_mean(lam, p.alpha, R)
    resid = np.array(
        [
            math.fsum(g.interferer_distances ** (-p.alpha))
            - (conditional_interference_mean(lam, p.alpha, g.serving_distance) - tail)
            for g in geos
        ]
    )
    est = McEstimate.from_samples(resid)
    report.checks.append(MomentCheck("conditional_interference", est, 0.0, est.covers(0.0)))

    scale = 1 / math.sqrt(2 * math.pi * lam)
    ks = stats.kstest(d0, "rayleigh", args=(0, scale))
    report.checks.append(
        MomentCheck(
            "serving_distance_rayleigh",
            McEstimate(float(ks.statistic), 0.0, n_geo),
            0.0,
            bool(ks.pvalue >= ks_level),
            detail=f"p-value {ks.pvalue:.4g}",
        )
    )
    return report


def with_design(config: SimulationConfig, design: DesignPoint, **changes) -> SimulationConfig:
    return replace(config, design=design, **changes)
