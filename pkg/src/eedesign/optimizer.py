"""EE maximization for a fixed SE target.

The transmit energy is eliminated in closed form (``rho_star``), which leaves
an integer problem in the antenna count M and UE count K.  That problem is
solved three ways here: per-variable closed-form optima combined in an
alternating loop, an exhaustive rectangle search that serves as the
reference, and a K-profile search (best integer M for every K) used for
parameter sweeps.  A fixed-UE-density variant ties the AP density to K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .analytic import ee_from_se, noise_term, sinr_factor
from .errors import EmptyFeasibleSetError, InfeasibleError, InvalidParameterError
from .params import DesignPoint, HardwareProfile, PropagationParams

CONVERGED = "converged"
INFEASIBLE = "infeasible"
HIT_ITERATION_CAP = "hit-iteration-cap"

DEFAULT_M_RANGE = (2, 400)
DEFAULT_K_RANGE = (1, 60)


class TrajectoryPoint(NamedTuple):
    M: int
    K: int
    rho: float
    ee: float


@dataclass
class OptimizationOutcome:
    design: DesignPoint
    ee: float
    iterations: int
    trajectory: List[TrajectoryPoint]
    status: str


@dataclass
class GridSearchReport:
    best: DesignPoint
    ee: float
    M_values: np.ndarray
    K_values: np.ndarray
    surface: np.ndarray  # EE per (M, K); NaN marks infeasible cells
    bounds_searched: Tuple[Tuple[int, int], Tuple[int, int]]
    _surface_map: Optional[Dict[Tuple[int, int], float]] = field(default=None, repr=False)

    @property
    def ee_surface(self) -> Dict[Tuple[int, int], float]:
        """Feasible cells only, keyed by (M, K)."""
        if self._surface_map is None:
            idx_m, idx_k = np.nonzero(~np.isnan(self.surface))
            self._surface_map = {
                (int(self.M_values[i]), int(self.K_values[j])): float(self.surface[i, j])
                for i, j in zip(idx_m, idx_k)
            }
        return self._surface_map


# -- transmit energy ----------------------------------------------------------


def antenna_threshold(p: PropagationParams, gamma: float, K: float) -> float:
    """M must strictly exceed this for the SE target to be reachable."""
    c = sinr_factor(gamma, p.epsilon)
    return K + c * 2 * K / (p.alpha - 2)


def rho_star(p: PropagationParams, gamma: float, lam: float, M: float, K: float) -> float:
    """Energy per symbol per UE that makes the SE bound equal ``gamma``.

    Raises:
        InvalidParameterError: if M <= K or gamma is not below the
            impairment limit.
        InfeasibleError: if no finite transmit energy reaches ``gamma``.
    """
    if not M >= K + 1:
        raise InvalidParameterError(f"zero-forcing needs M >= K + 1, got M={M}, K={K}")
    c = sinr_factor(gamma, p.epsilon)
    denominator = M - K - c * 2 * K / (p.alpha - 2)
    if denominator <= 0:
        raise InfeasibleError(
            f"SE target {gamma} unreachable with M={M}, K={K}: "
            f"need M > {antenna_threshold(p, gamma, K):.6g}"
        )
    return c * noise_term(p, lam) / denominator


def design_ee(
    p: PropagationParams, h: HardwareProfile, gamma: float, lam: float, M: float, K: float
) -> float:
    """EE of (M, K) at density ``lam`` with rho chosen by ``rho_star``."""
    rho = rho_star(p, gamma, lam, M, K)
    return ee_from_se(h, DesignPoint(rho=rho, lam=lam, M=M, K=K), gamma)


def _ee_or_nan(p, h, gamma, lam, M, K) -> float:
    try:
        return design_ee(p, h, gamma, lam, M, K)
    except (InfeasibleError, InvalidParameterError):
        return math.nan


def _pick_best(candidates, score):
    # candidates in increasing order so ties keep the smaller one
    best, best_ee = None, -math.inf
    for cand in candidates:
        ee = score(cand)
        if not math.isnan(ee) and ee > best_ee:
            best, best_ee = cand, ee
    return best, best_ee


# -- antennas -----------------------------------------------------------------


def m_star(p: PropagationParams, h: HardwareProfile, gamma: float, lam: float, K: float) -> float:
    """Real-valued EE-optimal antenna count for fixed K."""
    if not K >= 1:
        raise InvalidParameterError(f"K must be at least 1, got {K}")
    c = sinr_factor(gamma, p.epsilon)
    circuit = h.D0 + h.D1 * K
    if circuit <= 0:
        raise InvalidParameterError("D0 + D1*K must be positive for a finite optimum")
    root = math.sqrt(c * K * noise_term(p, lam) / (h.eta * circuit))
    return K + 2 * K * c / (p.alpha - 2) + root


def best_integer_m(
    p: PropagationParams, h: HardwareProfile, gamma: float, lam: float, K: int
) -> int:
    """Integer antenna count maximizing EE for fixed K.

    The relaxed objective is unimodal in M, so the answer is the floor or the
    ceiling of ``m_star``; the smaller one wins ties.  When neither is
    feasible (only possible without noise) the smallest feasible integer
    above the optimum is returned.
    """
    m = m_star(p, h, gamma, lam, K)
    lo = max(math.floor(m), K + 1)
    hi = max(math.ceil(m), K + 1)
    best, _ = _pick_best(sorted({lo, hi}), lambda M: _ee_or_nan(p, h, gamma, lam, M, K))
    if best is None:
        best = max(math.floor(antenna_threshold(p, gamma, K)) + 1, K + 1)
        if math.isnan(_ee_or_nan(p, h, gamma, lam, best, K)):
            best += 1
    return int(best)


# -- UEs ----------------------------------------------------------------------


def k_star(p: PropagationParams, h: HardwareProfile, gamma: float, lam: float, beta: float) -> float:
    """Real-valued EE-optimal UE count for a fixed antenna/UE ratio ``beta``."""
    if not beta > 1:
        raise InvalidParameterError(f"beta must exceed 1, got {beta}")
    if not h.D1 > 0:
        raise InvalidParameterError("D1 must be positive for a finite K optimum")
    c = sinr_factor(gamma, p.epsilon)
    margin = beta - 1 - c * 2 / (p.alpha - 2)
    if margin <= 0:
        raise InfeasibleError(f"beta={beta:.6g} too small for SE target {gamma}")
    radiated = c * noise_term(p, lam) / h.eta
    return math.sqrt(radiated / (beta * h.D1 * margin) + h.C0 / (beta * h.D1))


def antennas_for_ratio(beta: float, K: int) -> int:
    """Nearest integer to beta*K (halves round up), at least K + 1."""
    return max(int(math.floor(beta * K + 0.5)), K + 1)


def best_integer_k_at_ratio(
    p: PropagationParams, h: HardwareProfile, gamma: float, lam: float, beta: float
) -> int:
    """Integer K maximizing EE with the ratio held exactly (M = beta*K, real).

    Floor or ceiling of ``k_star``; the smaller wins ties.
    """
    k = k_star(p, h, gamma, lam, beta)
    candidates = sorted({max(math.floor(k), 1), max(math.ceil(k), 1)})
    best, _ = _pick_best(
        candidates, lambda K: -reciprocal_ee_relaxed(p, h, gamma, lam, K, beta)
    )
    if best is None:
        raise InfeasibleError(f"no integer K near {k:.6g} is feasible at beta={beta:.6g}")
    return int(best)


def best_integer_k(
    p: PropagationParams, h: HardwareProfile, gamma: float, lam: float, beta: float
) -> Tuple[int, int]:
    """Integer (M, K) maximizing EE along the ray M = beta*K.

    Compares the floor and ceiling of ``k_star`` with M rounded from beta*K.
    """
    k = k_star(p, h, gamma, lam, beta)
    candidates = sorted({max(math.floor(k), 1), max(math.ceil(k), 1)})
    best, _ = _pick_best(
        candidates,
        lambda K: _ee_or_nan(p, h, gamma, lam, antennas_for_ratio(beta, K), K),
    )
    if best is None:
        raise InfeasibleError(f"no integer K near {k:.6g} is feasible at beta={beta:.6g}")
    return antennas_for_ratio(beta, best), int(best)


# -- joint optimization ------------------------------------------------------


def _point(p, h, gamma, lam, M, K) -> TrajectoryPoint:
    rho = rho_star(p, gamma, lam, M, K)
    return TrajectoryPoint(int(M), int(K), rho, design_ee(p, h, gamma, lam, M, K))


def alternating_optimize(
    p: PropagationParams,
    h: HardwareProfile,
    gamma: float,
    lam: float,
    initial_M: int = 10,
    initial_K: int = 1,
    tol: float = 1e-8,
    max_iters: int = 100,
) -> OptimizationOutcome:
    """Alternate the closed-form K update (ratio M/K held) and M update.

    One iteration is a K step followed by an M step, each followed by a
    fresh ``rho_star``.  A step that would lower the EE (possible only
    through integer rounding) is rejected, so the recorded trajectory is
    nondecreasing.  Stops when (M, K) repeats or the relative EE gain drops
    below ``tol``.
    """
    try:
        current = _point(p, h, gamma, lam, initial_M, initial_K)
    except (InfeasibleError, InvalidParameterError) as exc:
        raise InfeasibleError(f"infeasible start ({initial_M}, {initial_K}): {exc}") from exc

    trajectory = [current]
    status = HIT_ITERATION_CAP
    iterations = 0
    for iterations in range(1, max_iters + 1):
        previous = current

        M_new, K_new = best_integer_k(p, h, gamma, lam, current.M / current.K)
        candidate = _point(p, h, gamma, lam, M_new, K_new)
        if candidate.ee >= current.ee:
            current = candidate

        M_new = best_integer_m(p, h, gamma, lam, current.K)
        candidate = _point(p, h, gamma, lam, M_new, current.K)
        if candidate.ee >= current.ee:
            current = candidate

        trajectory.append(current)
        if (current.M, current.K) == (previous.M, previous.K):
            status = CONVERGED
            break
        if previous.ee > 0 and (current.ee - previous.ee) / previous.ee < tol:
            status = CONVERGED
            break

    return OptimizationOutcome(
        design=DesignPoint(rho=current.rho, lam=lam, M=current.M, K=current.K),
        ee=current.ee,
        iterations=iterations,
        trajectory=trajectory,
        status=status,
    )


def grid_search(
    p: PropagationParams,
    h: HardwareProfile,
    gamma: float,
    lam: float,
    M_range: Sequence[int] = DEFAULT_M_RANGE,
    K_range: Sequence[int] = DEFAULT_K_RANGE,
) -> GridSearchReport:
    """Exhaustive EE evaluation over the inclusive (M, K) rectangle.

    Ties resolve to the smallest M, then the smallest K.
    """
    M_values = np.arange(int(M_range[0]), int(M_range[1]) + 1)
    K_values = np.arange(int(K_range[0]), int(K_range[1]) + 1)
    if M_values.size == 0 or K_values.size == 0:
        raise EmptyFeasibleSetError("empty search rectangle")
    c = sinr_factor(gamma, p.epsilon)
    Ms = M_values[:, None].astype(float)
    Ks = K_values[None, :].astype(float)

    margin = Ms - Ks - c * 2 * Ks / (p.alpha - 2)
    feasible = (Ms >= Ks + 1) & (margin > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(feasible, c * noise_term(p, lam) / margin, np.nan)
        per_ap = Ks * rho / h.eta + h.C0 + h.C1 * Ks + h.D0 * Ms + h.D1 * Ms * Ks
        surface = Ks * gamma / (per_ap + h.A * Ks * gamma)
    surface = np.where(feasible, surface, np.nan)

    if not feasible.any():
        raise EmptyFeasibleSetError(
            f"no feasible (M, K) in M={tuple(M_range)}, K={tuple(K_range)} for gamma={gamma}"
        )
    i, j = np.unravel_index(np.nanargmax(surface), surface.shape)
    M_best, K_best = int(M_values[i]), int(K_values[j])
    return GridSearchReport(
        best=DesignPoint(rho=float(rho[i, j]), lam=lam, M=M_best, K=K_best),
        ee=float(surface[i, j]),
        M_values=M_values,
        K_values=K_values,
        surface=surface,
        bounds_searched=(tuple(M_range), tuple(K_range)),
    )


def _running_best(points: List[TrajectoryPoint]) -> List[TrajectoryPoint]:
    out: List[TrajectoryPoint] = []
    for pt in points:
        if not out or pt.ee > out[-1].ee:
            out.append(pt)
    return out


def profile_optimize(
    p: PropagationParams,
    h: HardwareProfile,
    gamma: float,
    lam: float,
    K_range: Sequence[int] = (1, 200),
) -> OptimizationOutcome:
    """Best integer M for every K in ``K_range``, then the best K.

    Exact over K_range with M unbounded, because the optimal integer M for a
    given K is one of the two neighbours of ``m_star``.
    """
    points = []
    for K in range(int(K_range[0]), int(K_range[1]) + 1):
        try:
            M = best_integer_m(p, h, gamma, lam, K)
            points.append(_point(p, h, gamma, lam, M, K))
        except InfeasibleError:
            continue
    if not points:
        raise EmptyFeasibleSetError(f"no feasible K in {tuple(K_range)}")
    path = _running_best(points)
    best = path[-1]
    return OptimizationOutcome(
        design=DesignPoint(rho=best.rho, lam=lam, M=best.M, K=best.K),
        ee=best.ee,
        iterations=len(points),
        trajectory=path,
        status=CONVERGED,
    )


# -- fixed UE density ---------------------------------------------------------


def optimize_with_ue_density(
    p: PropagationParams,
    h: HardwareProfile,
    gamma: float,
    mu: float,
    lambda_max: float,
    K_range: Sequence[int] = DEFAULT_K_RANGE,
) -> OptimizationOutcome:
    """Maximize EE when every UE must be served: the AP density is mu/K.

    K values whose implied density exceeds ``lambda_max`` are skipped; M is
    the best integer for each K.
    """
    if not mu > 0:
        raise InvalidParameterError(f"UE density must be positive, got {mu}")
    candidates = []
    for K in range(int(K_range[0]), int(K_range[1]) + 1):
        lam = mu / K
        if lam > lambda_max:
            continue
        try:
            M = best_integer_m(p, h, gamma, lam, K)
            candidates.append((_point(p, h, gamma, lam, M, K), lam))
        except InfeasibleError:
            continue
    if not candidates:
        raise InfeasibleError(
            f"no K in {tuple(K_range)} gives AP density mu/K <= lambda_max={lambda_max:g}"
        )
    best_pt, best_lam = candidates[0]
    for pt, lam in candidates[1:]:
        if pt.ee > best_pt.ee:
            best_pt, best_lam = pt, lam
    return OptimizationOutcome(
        design=DesignPoint(rho=best_pt.rho, lam=best_lam, M=best_pt.M, K=best_pt.K),
        ee=best_pt.ee,
        iterations=len(candidates),
        trajectory=_running_best([pt for pt, _ in candidates]),
        status=CONVERGED,
    )


def fixed_design_with_ue_density(
    p: PropagationParams,
    h: HardwareProfile,
    gamma: float,
    mu: float,
    lambda_max: float,
    M: int,
    K: int,
) -> OptimizationOutcome:
    """Evaluation mode: (M, K) given, AP density mu/K and rho from rho_star."""
    lam = mu / K
    if lam > lambda_max:
        raise InfeasibleError(f"AP density {lam:g} exceeds lambda_max={lambda_max:g}")
    pt = _point(p, h, gamma, lam, M, K)
    return OptimizationOutcome(
        design=DesignPoint(rho=pt.rho, lam=lam, M=M, K=K),
        ee=pt.ee,
        iterations=0,
        trajectory=[pt],
        status=CONVERGED,
    )


# -- relaxed problem ----------------------------------------------------------


def reciprocal_ee_relaxed(
    p: PropagationParams, h: HardwareProfile, gamma: float, lam: float, K: float, beta: float
) -> float:
    """1/EE of the reduced problem in real (K, beta) with M = beta*K.

    Returns ``inf`` outside the feasible region.
    """
    c = sinr_factor(gamma, p.epsilon)
    margin = K * (beta - 1) - c * 2 * K / (p.alpha - 2)
    if K <= 0 or margin <= 0:
        return math.inf
    rho = c * noise_term(p, lam) / margin
    M = beta * K
    energy = K * rho / h.eta + h.C0 + h.C1 * K + h.D0 * M + h.D1 * M * K + h.A * K * gamma
    return energy / (K * gamma)


_CBRT_EPS = np.finfo(float).eps ** (1 / 3)


def fd_step(x: float) -> float:
    """Cube-root-of-epsilon step, scaled to the magnitude of ``x``."""
    return _CBRT_EPS * max(1.0, abs(x))


def fd_hessian(f, x: float, y: float) -> np.ndarray:
    """Central finite-difference Hessian of a scalar function of two variables."""
    hx, hy = fd_step(x), fd_step(y)
    f0 = f(x, y)
    fxx = (f(x + hx, y) - 2 * f0 + f(x - hx, y)) / hx**2
    fyy = (f(x, y + hy) - 2 * f0 + f(x, y - hy)) / hy**2
    fxy = (
        f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) + f(x - hx, y - hy)
    ) / (4 * hx * hy)
    return np.array([[fxx, fxy], [fxy, fyy]])


@dataclass
class ConvexityReport:
    points: np.ndarray  # evaluated (K, beta) rows
    min_eigenvalues: np.ndarray
    scales: np.ndarray  # Hessian trace per point
    excluded: int
    tolerance: float

    @property
    def relative(self) -> np.ndarray:
        return self.min_eigenvalues / self.scales

    @property
    def violations(self) -> np.ndarray:
        """Rows of ``points`` whose Hessian is not PSD within tolerance."""
        return self.points[self.relative < -self.tolerance]

    @property
    def worst_eigenvalue(self) -> float:
        return float(self.min_eigenvalues.min()) if self.min_eigenvalues.size else math.nan

    @property
    def worst_relative(self) -> float:
        return float(self.relative.min()) if self.min_eigenvalues.size else math.nan

    @property
    def all_psd(self) -> bool:
        return len(self.violations) == 0


def relaxed_convexity_check(
    p: PropagationParams,
    h: HardwareProfile,
    gamma: float,
    lam: float,
    samples,
    tolerance: float = 1e-6,
) -> ConvexityReport:
    """Finite-difference Hessians of the relaxed reciprocal EE in (K, beta).

    ``samples`` holds (K, beta) rows.  Points too close to the feasibility
    edge for the difference stencil are excluded and counted.  A point
    counts as a violation when its smallest eigenvalue is below
    ``-tolerance`` times the Hessian trace.
    """
    c = sinr_factor(gamma, p.epsilon)
    beta_min = 1 + c * 2 / (p.alpha - 2)
    f = lambda K, beta: reciprocal_ee_relaxed(p, h, gamma, lam, K, beta)

    kept, eigs, scales = [], [], []
    excluded = 0
    for K, beta in np.asarray(samples, dtype=float).reshape(-1, 2):
        if K - fd_step(K) <= 0 or beta - 2 * fd_step(beta) <= beta_min:
            excluded += 1
            continue
        H = fd_hessian(f, K, beta)
        kept.append((K, beta))
        eigs.append(np.linalg.eigvalsh(H)[0])
        scales.append(abs(np.trace(H)))
    return ConvexityReport(
        points=np.array(kept).reshape(-1, 2),
        min_eigenvalues=np.array(eigs),
        scales=np.array(scales),
        excluded=excluded,
        tolerance=tolerance,
    )


def sample_relaxed_points(
    p: PropagationParams,
    gamma: float,
    n: int,
    rng: np.random.Generator,
    M_range: Sequence[float] = DEFAULT_M_RANGE,
    K_range: Sequence[float] = DEFAULT_K_RANGE,
) -> np.ndarray:
    """Uniform (K, M) draws in the box, kept when feasible, returned as
    (K, beta) rows."""
    c = sinr_factor(gamma, p.epsilon)
    beta_min = 1 + c * 2 / (p.alpha - 2)
    rows = []
    while len(rows) < n:
        K = rng.uniform(*K_range)
        M = rng.uniform(*M_range)
        if M >= K + 1 and M / K > beta_min * (1 + 1e-3):
            rows.append((K, M / K))
    return np.array(rows)
