#!/usr/bin/env python3
"""
Tests for the command-line entry point and its exit codes
"""
import os

import pandas as pd
import pytest
import yaml

from brw_source.exceptions import ConfigError
from brw_source.main import main
from brw_source.schemas import RunConfig, config_with_stack, dump_config, load_config, parse_config

REFERENCE_CONFIG = os.path.join(os.path.dirname(os.path.abspath(__file__)), "configs", "table1.yaml")


@pytest.fixture
def fixed_pump_config(tmp_path):
    with open(REFERENCE_CONFIG) as handle:
        raw = yaml.safe_load(handle)
    raw["pump"]["auto_phase_match"] = False
    path = tmp_path / "fixed_pump.yaml"
    path.write_text(yaml.safe_dump(raw))
    return str(path)


def test_reference_config_loads():
    """Test the shipped configuration validates"""
    config = load_config(REFERENCE_CONFIG)
    stack = config.layer_stack()
    assert stack.core.al_fraction == 0.7
    assert [layer.thickness_nm for layer in stack.bilayer] == [127.0, 309.0]
    assert config.jsa.samples % 2 == 1


def test_unknown_key_rejected():
    """Test extra keys fail validation"""
    with pytest.raises(ConfigError):
        parse_config({"stack": {"core": {"thickness_nm": 370.0}, "reflector": [], "colour": "blue"}})


def test_config_round_trip(tmp_path):
    """Test an optimized stack can be written back as a loadable config"""
    config = load_config(REFERENCE_CONFIG)
    updated = config_with_stack(config, config.layer_stack().with_parameters(t_c=400.0))
    path = tmp_path / "best.yaml"
    path.write_text(dump_config(updated))
    reloaded = load_config(str(path))
    assert isinstance(reloaded, RunConfig)
    assert reloaded.stack.core.thickness_nm == 400.0


def test_empty_reflector_exits_1(tmp_path):
    """Test a config without reflector layers"""
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump({"schema_version": 1, "stack": {
        "core": {"al_fraction": 0.7, "thickness_nm": 370.0}, "reflector": [],
    }}))
    assert main(["--config", str(path), "--out", str(tmp_path), "modes"]) == 1


def test_missing_config_exits_1(tmp_path):
    """Test an unreadable config path"""
    assert main(["--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path), "modes"]) == 1


def test_unknown_sensitivity_parameter_exits_1(fixed_pump_config, tmp_path):
    """Test sensitivity on a parameter the stack does not have"""
    code = main(["--config", fixed_pump_config, "--out", str(tmp_path), "sensitivity", "--parameter", "colour"])
    assert code == 1


def test_modes_on_reference_stack(fixed_pump_config, tmp_path):
    """Test the modes command finds pump, signal and idler"""
    assert main(["--config", fixed_pump_config, "--out", str(tmp_path), "modes"]) == 0
    modes = pd.read_csv(tmp_path / "modes.csv")
    assert list(modes["role"]) == ["pump", "signal", "idler"]
    assert list(modes["mode_class"]) == ["Bragg", "TIR", "TIR"]
    for role in ("pump", "signal", "idler"):
        profile = pd.read_csv(tmp_path / f"profile_{role}.csv")
        assert list(profile.columns) == ["position_nm", "re_u", "im_u"]


def test_sphere_benchmark_command(tmp_path):
    """Test optimize --sphere runs without a stack config"""
    code = main(["--config", "", "--out", str(tmp_path), "--seed", "3",
                 "optimize", "--sphere", "--population", "16", "--generations", "10"])
    assert code == 0
    trace = pd.read_csv(tmp_path / "convergence.csv")
    assert list(trace.columns) == ["generation", "best_fitness", "mean_fitness"]
    assert len(trace) == 11


def test_malformed_deltas_exit_1(fixed_pump_config, tmp_path):
    """Test a non-numeric --deltas list is reported as an argument error"""
    code = main(["--config", fixed_pump_config, "--out", str(tmp_path),
                 "sensitivity", "--parameter", "x_c", "--deltas", "a,b"])
    assert code == 1


def test_unknown_command_exits_1(tmp_path):
    """Test an unknown subcommand"""
    assert main(["--config", "", "--out", str(tmp_path), "transmogrify"]) == 1


def test_help_exits_0(capsys):
    """Test --help returns success"""
    assert main(["--help"]) == 0
    assert "sensitivity" in capsys.readouterr().out
