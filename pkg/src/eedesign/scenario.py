"""Scenario files: YAML documents with the sections

    propagation  alpha, omega_db, sigma2, epsilon
    hardware     eta, A_joule_per_gbit, C0_watt, C1_watt, D0_watt,
                 D1_joule_per_symbol, symbol_time
    constraint   gamma, lambda_max, mu (optional)
    search       grid rectangle and start point for the optimizers (optional)
    sweep        variable, grid, start, stop, points, ... (optional)
    mc           Monte-Carlo settings (optional)

Values are kept in file units inside the dataclasses below so that a
parsed scenario dumps back to the same document; conversion to the
per-symbol internal units happens in ``propagation_params()`` and
``hardware_profile()``.
"""

from __future__ import annotations

from dataclasses import MISSING, asdict, dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

from .errors import ConfigError, InvalidParameterError
from .mcsim import PRECODER_MODES
from .params import Constraint, HardwareProfile, PropagationParams

SWEEP_VARIABLES = ("lambda", "mu", "gamma")
GRID_KINDS = ("geometric", "linear")


@dataclass(frozen=True)
class PropagationSection:
    alpha: float
    omega_db: float
    sigma2: float
    epsilon: float


@dataclass(frozen=True)
class HardwareSection:
    eta: float
    A_joule_per_gbit: float
    C0_watt: float
    C1_watt: float
    D0_watt: float
    D1_joule_per_symbol: float
    symbol_time: float


@dataclass(frozen=True)
class ConstraintSection:
    gamma: float
    lambda_max: float
    mu: Optional[float] = None


@dataclass(frozen=True)
class SearchSection:
    M_min: int = 2
    M_max: int = 400
    K_min: int = 1
    K_max: int = 60
    profile_K_max: int = 200  # K range of the per-point optimization in sweeps
    initial_M: int = 10
    initial_K: int = 1


@dataclass(frozen=True)
class SweepSection:
    variable: str
    grid: str
    start: float
    stop: float
    points: int
    series_gamma: Tuple[float, ...] = ()  # extra SE targets for lambda sweeps
    reference_designs: Tuple[Tuple[int, int], ...] = ((10, 1), (195, 20))


@dataclass(frozen=True)
class McSection:
    trials: int = 10_000
    tail_fraction: float = 1e-3
    master_seed: int = 0
    precoder_mode: str = "distributional"
    fading_draws_per_geometry: int = 1
    moment_draws: int = 2_000
    moment_distance: float = 100.0


@dataclass(frozen=True)
class Scenario:
    propagation: PropagationSection
    hardware: HardwareSection
    constraint: ConstraintSection
    search: SearchSection = SearchSection()
    sweep: Optional[SweepSection] = None
    mc: Optional[McSection] = None

    def propagation_params(self) -> PropagationParams:
        s = self.propagation
        return PropagationParams.from_db(s.alpha, s.omega_db, s.sigma2, s.epsilon)

    def hardware_profile(self) -> HardwareProfile:
        return HardwareProfile.from_watts(**asdict(self.hardware))

    def constraint_params(self) -> Constraint:
        c = self.constraint
        return Constraint(gamma=c.gamma, lambda_max=c.lambda_max, mu=c.mu)

    @property
    def M_range(self) -> Tuple[int, int]:
        return (self.search.M_min, self.search.M_max)

    @property
    def K_range(self) -> Tuple[int, int]:
        return (self.search.K_min, self.search.K_max)


# -- parsing ------------------------------------------------------------------

_SECTIONS = {
    "propagation": (PropagationSection, True),
    "hardware": (HardwareSection, True),
    "constraint": (ConstraintSection, True),
    "search": (SearchSection, False),
    "sweep": (SweepSection, False),
    "mc": (McSection, False),
}


def _line_index(text: str) -> Dict[str, int]:
    """1-based line of every mapping key, by dotted path."""
    lines: Dict[str, int] = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
                lines[path] = key_node.start_mark.line + 1
                walk(value_node, path)

    try:
        walk(yaml.compose(text, Loader=yaml.SafeLoader), "")
    except yaml.YAMLError:
        pass
    return lines


def _coerce(value, kind, path, lines):
    def fail(msg):
        raise ConfigError(msg, field=path, line=lines.get(path))

    if kind is str:
        if not isinstance(value, str):
            fail(f"expected a string, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool):
            fail("expected an integer")
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if isinstance(value, str):
            try:
                return int(value)
            except ValueError:
                pass
        fail(f"expected an integer, got {value!r}")
    if kind is float:
        if isinstance(value, bool):
            fail("expected a number")
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            # YAML 1.1 reads "1e-20" (no dot) as a string
            try:
                return float(value)
            except ValueError:
                pass
        fail(f"expected a number, got {value!r}")
    raise AssertionError(kind)


_FIELD_KINDS = {
    "variable": str,
    "grid": str,
    "precoder_mode": str,
    "points": int,
    "trials": int,
    "master_seed": int,
    "fading_draws_per_geometry": int,
    "moment_draws": int,
    "M_min": int,
    "M_max": int,
    "K_min": int,
    "K_max": int,
    "profile_K_max": int,
    "initial_M": int,
    "initial_K": int,
}


def _parse_section(name, cls, raw, lines):
    if not isinstance(raw, dict):
        raise ConfigError("section must be a mapping", field=name, line=lines.get(name))
    known = {f.name for f in fields(cls)}
    for key in raw:
        if key not in known:
            path = f"{name}.{key}"
            raise ConfigError("unknown key", field=path, line=lines.get(path))
    kwargs = {}
    for f in fields(cls):
        path = f"{name}.{f.name}"
        if f.name not in raw:
            if f.default is MISSING and f.default_factory is MISSING:
                raise ConfigError("missing required key", field=path, line=lines.get(name))
            continue
        value = raw[f.name]
        if f.name == "mu" and value is None:
            kwargs[f.name] = None
        elif f.name == "series_gamma":
            if not isinstance(value, list):
                raise ConfigError("expected a list of numbers", field=path, line=lines.get(path))
            kwargs[f.name] = tuple(_coerce(v, float, path, lines) for v in value)
        elif f.name == "reference_designs":
            if not isinstance(value, list) or not all(
                isinstance(v, list) and len(v) == 2 for v in value
            ):
                raise ConfigError("expected a list of [M, K] pairs", field=path, line=lines.get(path))
            kwargs[f.name] = tuple(
                (_coerce(m, int, path, lines), _coerce(k, int, path, lines)) for m, k in value
            )
        else:
            kwargs[f.name] = _coerce(value, _FIELD_KINDS.get(f.name, float), path, lines)
    return cls(**kwargs)


def scenario_from_dict(data: Any, lines: Optional[Dict[str, int]] = None) -> Scenario:
    lines = lines or {}
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a mapping of sections")
    for key in data:
        if key not in _SECTIONS:
            raise ConfigError("unknown section", field=str(key), line=lines.get(str(key)))
    parsed = {}
    for name, (cls, required) in _SECTIONS.items():
        if name not in data or data[name] is None:
            if required:
                raise ConfigError("missing required section", field=name)
            continue
        parsed[name] = _parse_section(name, cls, data[name], lines)
    scenario = Scenario(**parsed)
    _validate(scenario, lines)
    return scenario


def _validate(s: Scenario, lines):
    def check(ok, path, msg):
        if not ok:
            raise ConfigError(msg, field=path, line=lines.get(path))

    try:
        s.propagation_params()
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), field="propagation", line=lines.get("propagation")) from exc
    try:
        s.hardware_profile()
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), field="hardware", line=lines.get("hardware")) from exc
    try:
        s.constraint_params()
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), field="constraint", line=lines.get("constraint")) from exc

    q = s.search
    check(1 <= q.K_min <= q.K_max, "search.K_max", "need 1 <= K_min <= K_max")
    check(2 <= q.M_min <= q.M_max, "search.M_max", "need 2 <= M_min <= M_max")
    check(q.profile_K_max >= q.K_min, "search.profile_K_max", "must be at least K_min")
    check(q.initial_M >= q.initial_K + 1, "search.initial_M", "start point needs M >= K + 1")

    if s.sweep is not None:
        w = s.sweep
        check(w.variable in SWEEP_VARIABLES, "sweep.variable",
              f"unknown sweep variable {w.variable!r}; expected one of {', '.join(SWEEP_VARIABLES)}")
        check(w.grid in GRID_KINDS, "sweep.grid", f"grid must be one of {', '.join(GRID_KINDS)}")
        check(w.points >= 1, "sweep.points", "need at least one point")
        if w.grid == "geometric":
            check(w.start > 0 and w.stop > 0, "sweep.start", "geometric grid needs positive endpoints")
        for M, K in w.reference_designs:
            check(K >= 1 and M >= K + 1, "sweep.reference_designs", "each pair needs M >= K + 1")

    if s.mc is not None:
        m = s.mc
        check(m.trials >= 1, "mc.trials", "need at least one trial")
        check(0 < m.tail_fraction < 1, "mc.tail_fraction", "must lie in (0, 1)")
        check(m.precoder_mode in PRECODER_MODES, "mc.precoder_mode",
              f"must be one of {', '.join(PRECODER_MODES)}")
        check(m.fading_draws_per_geometry >= 1, "mc.fading_draws_per_geometry", "must be >= 1")
        check(m.moment_draws >= 2, "mc.moment_draws", "need at least two draws")
        check(0 <= m.master_seed < 2**64, "mc.master_seed", "must be an unsigned 64-bit integer")


def parse_scenario(text: str) -> Scenario:
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark is not None else None
        raise ConfigError(f"YAML syntax error: {exc.problem}", line=line) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML error: {exc}") from exc
    return scenario_from_dict(data, _line_index(text))


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc.strerror}") from exc
    return parse_scenario(text)


def scenario_to_dict(s: Scenario) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for name in _SECTIONS:
        section = getattr(s, name)
        if section is None:
            continue
        d = asdict(section)
        if "series_gamma" in d:
            d["series_gamma"] = list(d["series_gamma"])
        if "reference_designs" in d:
            d["reference_designs"] = [list(pair) for pair in d["reference_designs"]]
        out[name] = d
    return out


def dump_scenario(s: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False)


def packaged_scenario(name: str = "table1") -> Scenario:
    """One of the scenario files shipped in ``eedesign/scenarios``."""
    text = resources.files("eedesign").joinpath(f"scenarios/{name}.yaml").read_text("utf-8")
    return parse_scenario(text)


def default_scenario() -> Scenario:
    return packaged_scenario("table1")
