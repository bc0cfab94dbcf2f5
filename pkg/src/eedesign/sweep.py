"""Single-point evaluation, optimization reports, parameter sweeps and the
Monte-Carlo validation run, all driven by a :class:`Scenario`.

Results come back as plain rows; CSV serialization uses a fixed column
order and ``.9g`` number formatting unless told otherwise.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import analytic, optimizer
from .errors import InfeasibleError, InvalidParameterError
from .mcsim import SimulationConfig, estimate_ergodic_se, validate_moment_identities
from .params import DesignPoint, EvaluationResult
from .scenario import Scenario, SweepSection

DEFAULT_PRECISION = 9


@dataclass
class SweepRow:
    series: str
    variable: str
    swept_value: float
    M: Optional[int] = None
    K: Optional[int] = None
    lam: Optional[float] = None
    rho: Optional[float] = None
    total_radiated_power_watt: Optional[float] = None
    se_bound: Optional[float] = None
    ee_analytic: Optional[float] = None
    ee_mc_mean: Optional[float] = None
    ee_mc_halfwidth: Optional[float] = None
    status: str = "ok"


SWEEP_COLUMNS = [
    "series",
    "variable",
    "swept_value",
    "M",
    "K",
    "lambda",
    "rho",
    "total_radiated_power_watt",
    "se_bound",
    "ee_analytic",
    "ee_mc_mean",
    "ee_mc_halfwidth",
    "status",
]


@dataclass
class McValidationRow:
    series: str
    variable: str
    swept_value: float
    M: int
    K: int
    lam: float
    rho: float
    se_bound: float
    se_mc_mean: float
    se_mc_halfwidth: float
    ee_analytic: float
    ee_mc_mean: float
    ee_mc_halfwidth: float
    bound_violation: int
    moments_ok: int


MC_COLUMNS = [
    "series",
    "variable",
    "swept_value",
    "M",
    "K",
    "lambda",
    "rho",
    "se_bound",
    "se_mc_mean",
    "se_mc_halfwidth",
    "ee_analytic",
    "ee_mc_mean",
    "ee_mc_halfwidth",
    "bound_violation",
    "moments_ok",
]


def _fmt(value, precision):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{precision}g")
    return str(value)


def rows_to_csv(rows: Iterable, columns: Sequence[str], precision: int = DEFAULT_PRECISION) -> str:
    """CSV text with a header row and LF line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        values = [getattr(row, f.name) for f in fields(row)]
        writer.writerow([_fmt(v, precision) for v in values])
    return buf.getvalue()


def sweep_csv(rows: Iterable[SweepRow], precision: int = DEFAULT_PRECISION) -> str:
    return rows_to_csv(rows, SWEEP_COLUMNS, precision)


def mc_csv(rows: Iterable[McValidationRow], precision: int = DEFAULT_PRECISION) -> str:
    return rows_to_csv(rows, MC_COLUMNS, precision)


def grid_values(sweep: SweepSection) -> np.ndarray:
    if sweep.grid == "geometric":
        return np.geomspace(sweep.start, sweep.stop, sweep.points)
    return np.linspace(sweep.start, sweep.stop, sweep.points)


def _design_row(scn: Scenario, series, variable, value, design: DesignPoint, gamma) -> SweepRow:
    p, h = scn.propagation_params(), scn.hardware_profile()
    result = analytic.evaluate(p, h, design)
    return SweepRow(
        series=series,
        variable=variable,
        swept_value=float(value),
        M=int(design.M),
        K=int(design.K),
        lam=design.lam,
        rho=design.rho,
        total_radiated_power_watt=design.K * design.rho / h.S,
        se_bound=result.se_bound,
        ee_analytic=result.ee,
    )


# -- evaluate -----------------------------------------------------------------


@dataclass
class EvaluateReport:
    design: DesignPoint
    result: EvaluationResult
    row: SweepRow


def run_evaluate(scn: Scenario, M: int, K: int, lam: Optional[float] = None) -> EvaluateReport:
    """Breakdown at (M, K) with rho from ``rho_star`` at ``lam``
    (default: the scenario's maximal AP density)."""
    p, h = scn.propagation_params(), scn.hardware_profile()
    gamma = scn.constraint.gamma
    lam = scn.constraint.lambda_max if lam is None else lam
    if not M >= K + 1:
        raise InvalidParameterError(f"zero-forcing needs M >= K + 1, got M={M}, K={K}")
    _check_gamma(scn, gamma)
    rho = optimizer.rho_star(p, gamma, lam, M, K)
    design = DesignPoint(rho=rho, lam=lam, M=M, K=K)
    row = _design_row(scn, "evaluate", "lambda", lam, design, gamma)
    return EvaluateReport(design=design, result=analytic.evaluate(p, h, design), row=row)


def _check_gamma(scn: Scenario, gamma: float):
    bound = analytic.feasibility_gamma_bound(scn.propagation.epsilon)
    if not gamma < bound:
        raise InfeasibleError(
            f"SE target gamma={gamma:g} is not below the hardware-impairment limit "
            f"-2*log2(epsilon) = {bound:.4f} bit/symbol"
        )


# -- optimize -----------------------------------------------------------------


@dataclass
class OptimizeReport:
    alternating: Optional[optimizer.OptimizationOutcome] = None
    grid: Optional[optimizer.GridSearchReport] = None

    @property
    def relative_gap(self) -> Optional[float]:
        """(grid EE - alternating EE) / grid EE."""
        if self.alternating is None or self.grid is None:
            return None
        return (self.grid.ee - self.alternating.ee) / self.grid.ee


def run_optimize(scn: Scenario, method: str = "both", lam: Optional[float] = None) -> OptimizeReport:
    if method not in ("alternating", "grid", "both"):
        raise InvalidParameterError(f"unknown method {method!r}")
    p, h = scn.propagation_params(), scn.hardware_profile()
    gamma = scn.constraint.gamma
    lam = scn.constraint.lambda_max if lam is None else lam
    _check_gamma(scn, gamma)
    report = OptimizeReport()
    if method in ("alternating", "both"):
        report.alternating = optimizer.alternating_optimize(
            p, h, gamma, lam, scn.search.initial_M, scn.search.initial_K
        )
    if method in ("grid", "both"):
        report.grid = optimizer.grid_search(p, h, gamma, lam, scn.M_range, scn.K_range)
    return report


@dataclass
class _SurfaceRow:
    M: int
    K: int
    ee: float


@dataclass
class _TrajectoryRow:
    step: int
    M: int
    K: int
    rho: float
    ee: float


def surface_csv(grid: optimizer.GridSearchReport, precision: int = DEFAULT_PRECISION) -> str:
    rows = [_SurfaceRow(M, K, ee) for (M, K), ee in sorted(grid.ee_surface.items())]
    return rows_to_csv(rows, ["M", "K", "ee"], precision)


def trajectory_csv(outcome: optimizer.OptimizationOutcome, precision: int = DEFAULT_PRECISION) -> str:
    rows = [_TrajectoryRow(i, t.M, t.K, t.rho, t.ee) for i, t in enumerate(outcome.trajectory)]
    return rows_to_csv(rows, ["step", "M", "K", "rho", "ee"], precision)


# -- sweeps -------------------------------------------------------------------


def _infeasible(series, variable, value) -> SweepRow:
    return SweepRow(series=series, variable=variable, swept_value=float(value), status="infeasible")


def _optimized_at(scn: Scenario, gamma: float, lam: float) -> DesignPoint:
    p, h = scn.propagation_params(), scn.hardware_profile()
    K_range = (scn.search.K_min, scn.search.profile_K_max)
    return optimizer.profile_optimize(p, h, gamma, lam, K_range).design


def _sweep_points(scn: Scenario):
    """(series, swept value, design, gamma) for every point; design is None
    when the point is infeasible."""
    sweep = scn.sweep
    p, h = scn.propagation_params(), scn.hardware_profile()
    grid = grid_values(sweep)
    gamma0 = scn.constraint.gamma

    if sweep.variable == "lambda":
        for gamma in sweep.series_gamma or (gamma0,):
            for lam in grid:
                try:
                    yield f"gamma={gamma:g}", lam, _optimized_at(scn, gamma, lam), gamma
                except (InfeasibleError, InvalidParameterError):
                    yield f"gamma={gamma:g}", lam, None, gamma

    elif sweep.variable == "gamma":
        lam = scn.constraint.lambda_max
        for gamma in grid:
            try:
                yield "optimized", gamma, _optimized_at(scn, gamma, lam), gamma
            except (InfeasibleError, InvalidParameterError):
                yield "optimized", gamma, None, gamma

    elif sweep.variable == "mu":
        lam_max = scn.constraint.lambda_max
        for mu in grid:
            try:
                out = optimizer.optimize_with_ue_density(p, h, gamma0, mu, lam_max, scn.K_range)
                yield "optimized", mu, out.design, gamma0
            except (InfeasibleError, InvalidParameterError):
                yield "optimized", mu, None, gamma0
        for M, K in sweep.reference_designs:
            for mu in grid:
                try:
                    out = optimizer.fixed_design_with_ue_density(p, h, gamma0, mu, lam_max, M, K)
                    yield f"fixed_M{M}_K{K}", mu, out.design, gamma0
                except (InfeasibleError, InvalidParameterError):
                    yield f"fixed_M{M}_K{K}", mu, None, gamma0
    else:
        raise InvalidParameterError(f"unknown sweep variable {sweep.variable!r}")


def _mc_config(scn: Scenario, design: DesignPoint, trials=None, seed=None) -> SimulationConfig:
    mc = scn.mc
    return SimulationConfig.with_tail_fraction(
        scn.propagation_params(),
        design,
        mc.tail_fraction,
        trials=mc.trials if trials is None else trials,
        fading_draws_per_geometry=mc.fading_draws_per_geometry,
        master_seed=mc.master_seed if seed is None else seed,
        precoder_mode=mc.precoder_mode,
    )


def _ee_interval(scn: Scenario, design: DesignPoint, se_mean: float, se_hw: float):
    h = scn.hardware_profile()
    ee = analytic.ee_from_se(h, design, se_mean)
    if not math.isfinite(se_hw):
        return ee, math.inf
    hi = analytic.ee_from_se(h, design, se_mean + se_hw)
    lo = analytic.ee_from_se(h, design, max(se_mean - se_hw, 0.0))
    return ee, (hi - lo) / 2


def run_sweep(
    scn: Scenario,
    with_mc: bool = False,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    workers: int = 1,
) -> List[SweepRow]:
    """One row per grid point (and per series).

    With ``with_mc`` the EE is also computed from a Monte-Carlo SE estimate,
    which needs an ``mc`` section.
    """
    if scn.sweep is None:
        raise InvalidParameterError("scenario has no sweep section")
    if with_mc and scn.mc is None:
        raise InvalidParameterError("Monte-Carlo columns need an mc section")
    rows = []
    variable = scn.sweep.variable
    for series, value, design, gamma in _sweep_points(scn):
        if design is None:
            rows.append(_infeasible(series, variable, value))
            continue
        row = _design_row(scn, series, variable, value, design, gamma)
        if with_mc:
            est = estimate_ergodic_se(_mc_config(scn, design, trials, seed), workers)
            row.ee_mc_mean, row.ee_mc_halfwidth = _ee_interval(scn, design, est.mean, est.half_width)
        rows.append(row)
    return rows


def run_mc_validate(
    scn: Scenario,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    workers: int = 1,
) -> List[McValidationRow]:
    """Monte-Carlo SE and moment checks at every feasible sweep point.

    ``bound_violation`` is 1 where the analytic bound exceeds the MC mean
    plus its confidence half-width.
    """
    if scn.mc is None:
        raise InvalidParameterError("scenario has no mc section")
    if scn.sweep is None:
        raise InvalidParameterError("scenario has no sweep section")
    p = scn.propagation_params()
    rows = []
    for series, value, design, gamma in _sweep_points(scn):
        if design is None:
            continue
        config = _mc_config(scn, design, trials, seed)
        est = estimate_ergodic_se(config, workers)
        bound = analytic.se_lower_bound(p, design)
        moments = validate_moment_identities(
            config,
            draws=scn.mc.moment_draws,
            distance=scn.mc.moment_distance,
            chunk=max(1, 2_000_000 // (config.M * config.K)),
        )
        ee = analytic.evaluate(p, scn.hardware_profile(), design).ee
        ee_mc, ee_hw = _ee_interval(scn, design, est.mean, est.half_width)
        rows.append(
            McValidationRow(
                series=series,
                variable=scn.sweep.variable,
                swept_value=float(value),
                M=int(design.M),
                K=int(design.K),
                lam=design.lam,
                rho=design.rho,
                se_bound=bound,
                se_mc_mean=est.mean,
                se_mc_halfwidth=est.half_width,
                ee_analytic=ee,
                ee_mc_mean=ee_mc,
                ee_mc_halfwidth=ee_hw,
                bound_violation=int(bound > est.mean + est.half_width),
                moments_ok=int(moments.passed),
            )
        )
    return rows
