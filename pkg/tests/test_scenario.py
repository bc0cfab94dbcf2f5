import textwrap

import pytest

from eedesign.errors import ConfigError
from eedesign.params import TABLE1_HARDWARE, TABLE1_PROPAGATION
from eedesign.scenario import (
    default_scenario,
    dump_scenario,
    load_scenario,
    packaged_scenario,
    parse_scenario,
)

MINIMAL = textwrap.dedent(
    """\
    propagation:
      alpha: 3.76
      omega_db: 35
      sigma2: 1e-20
      epsilon: 0.05
    hardware:
      eta: 0.39
      A_joule_per_gbit: 1.15
      C0_watt: 10
      C1_watt: 0.1
      D0_watt: 1
      D1_joule_per_symbol: 1.56e-10
      symbol_time: 5e-8
    constraint:
      gamma: 3
      lambda_max: 1e-4
    """
)


def test_default_scenario_ships_reference_values():
    scn = default_scenario()
    assert scn.propagation.omega_db == 35.0
    assert scn.propagation_params() == TABLE1_PROPAGATION
    assert scn.hardware_profile() == TABLE1_HARDWARE
    assert scn.constraint.gamma == 3.0
    assert scn.sweep.variable == "lambda" and scn.sweep.points == 8


@pytest.mark.parametrize("name", ["table1", "ap_density", "ue_density"])
def test_round_trip(name):
    scn = packaged_scenario(name)
    assert parse_scenario(dump_scenario(scn)) == scn


def test_minimal_scenario_and_numeric_strings():
    scn = parse_scenario(MINIMAL)
    assert scn.propagation.sigma2 == 1e-20
    assert scn.hardware.symbol_time == 5e-8
    assert scn.sweep is None and scn.mc is None
    assert scn.M_range == (2, 400) and scn.K_range == (1, 60)
    assert parse_scenario(dump_scenario(scn)) == scn


def test_load_from_file(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text(MINIMAL)
    assert load_scenario(path) == parse_scenario(MINIMAL)
    with pytest.raises(ConfigError, match="cannot read"):
        load_scenario(tmp_path / "missing.yaml")


def test_bad_value_reports_line_and_field():
    text = MINIMAL.replace("eta: 0.39", "eta: abc")
    with pytest.raises(ConfigError) as err:
        parse_scenario(text)
    assert err.value.line == 7
    assert err.value.field == "hardware.eta"
    assert "line 7" in str(err.value) and "hardware.eta" in str(err.value)


@pytest.mark.parametrize(
    "edit, field",
    [
        (("gamma: 3", "gamma: 3\n  bogus: 1"), "constraint.bogus"),
        (("propagation:", "extra:\n  a: 1\npropagation:"), "extra"),
        (("  epsilon: 0.05\n", ""), "propagation.epsilon"),
        (("alpha: 3.76", "alpha: 1.5"), "propagation"),
    ],
)
def test_structural_errors(edit, field):
    with pytest.raises(ConfigError) as err:
        parse_scenario(MINIMAL.replace(*edit))
    assert err.value.field == field


def test_sweep_validation():
    bad = MINIMAL + "sweep:\n  variable: delta\n  grid: linear\n  start: 1\n  stop: 2\n  points: 3\n"
    with pytest.raises(ConfigError, match="unknown sweep variable"):
        parse_scenario(bad)
    bad = MINIMAL + "sweep:\n  variable: mu\n  grid: geometric\n  start: 0\n  stop: 2\n  points: 3\n"
    with pytest.raises(ConfigError, match="positive endpoints"):
        parse_scenario(bad)


def test_mc_validation():
    bad = MINIMAL + "mc:\n  trials: 0\n"
    with pytest.raises(ConfigError) as err:
        parse_scenario(bad)
    assert err.value.field == "mc.trials"
    with pytest.raises(ConfigError):
        parse_scenario(MINIMAL + "mc:\n  precoder_mode: mrt\n")


def test_yaml_syntax_error_has_line():
    with pytest.raises(ConfigError) as err:
        parse_scenario("propagation:\n  alpha: [1, 2\n")
    assert err.value.line is not None
