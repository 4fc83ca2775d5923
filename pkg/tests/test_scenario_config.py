#############################################################################
##
## Copyright (C) 2025 Killian-W.
## All rights reserved.
##
## This file is part of the Qtraj project.
##
## Licensed under the MIT License.
## You may obtain a copy of the License at:
##     https://opensource.org/licenses/MIT
##
## This software is provided "as is," without warranty of any kind.
##
#############################################################################

import json

import pytest
from core.config import ScenarioConfig
from core.exceptions import ScenarioError
from core.physics.geometry import CartesianChart, PolarChart
from core.physics.states import TwoVectorState


def config_with(**overrides):
    return ScenarioConfig(overrides)


def test_defaults_are_applied():
    scenario = config_with().validate()
    assert scenario["hbar"] == 1.0
    assert scenario["integrator"] == {"dt": 1e-3, "t_max": 1.0}
    assert scenario["law"] == "flat"
    assert scenario["ensemble"] is None


def test_nested_blocks_merge_with_defaults():
    config = config_with(integrator={"t_max": 5.0})
    assert config.integrator() == {"dt": 1e-3, "t_max": 5.0}
    assert config.copy()["integrator"]["t_max"] == 5.0


def test_item_access():
    config = config_with(name="osc")
    assert config["name"] == "osc"
    config["seed"] = 9
    assert config.get("seed") == 9
    assert config["chart"] == "cartesian"


def test_state_is_rebuilt_when_the_spec_changes():
    config = config_with()
    assert config.state().n == 1
    config["state"] = "product(ho:k=0, ho:k=0)"
    assert config.state().n == 2


def test_charts():
    config = config_with(state="product(ho:k=0, ho:k=0)", law="einstein", chart="polar")
    config.validate()
    assert isinstance(config.chart(), PolarChart)
    config["chart"] = "cartesian"
    assert isinstance(config.chart(), CartesianChart)


def test_holland_scenario():
    config = config_with(
        state="sup:levels=0|1,weights=1|1",
        law="holland",
        initial={"x0": [0.3], "angles": [1.0, 0.5, 0.0]},
        diagnostics=["dbb", "coupling"],
    )
    scenario = config.validate()
    assert isinstance(config.state(), TwoVectorState)
    assert scenario["initial"]["angles"] == [1.0, 0.5, 0.0]


@pytest.mark.parametrize(
    "overrides, field",
    [
        ({"colour": "red"}, "colour"),
        ({"law": "bohm"}, "law"),
        ({"chart": "spherical"}, "chart"),
        ({"hbar": 0.0}, "hbar"),
        ({"hbar": "1"}, "hbar"),
        ({"name": ""}, "name"),
        ({"seed": -1}, "seed"),
        ({"seed": 1.5}, "seed"),
        ({"state": "ho:k=99"}, "state"),
        ({"law": "holland"}, "state"),
        ({"state": "sup:levels=0|1"}, "state"),
        ({"chart": "polar"}, "chart"),
        ({"integrator": {"dt": -1.0}}, "integrator.dt"),
        ({"integrator": {"steps": 10}}, "integrator.steps"),
        ({"integrator": {"t_max": -2.0}}, "integrator.t_max"),
        ({"initial": {"q0": [0.0, 1.0]}}, "initial.q0"),
        ({"initial": {"signs": [2]}}, "initial.signs"),
        ({"initial": {"x0": [0.0]}}, "initial.x0"),
        ({"ensemble": {"count": 10}}, "ensemble.count"),
        ({"ensemble": {"bins": 0}}, "ensemble.bins"),
        ({"ensemble": {"coordinate": 1}}, "ensemble.coordinate"),
        ({"diagnostics": ["everything"]}, "diagnostics"),
        ({"diagnostics": "coupling"}, "diagnostics"),
        ({"diagnostics": ["covariance"]}, "diagnostics"),
        ({"diagnostics": ["dbb"]}, "diagnostics"),
        ({"diagnostics": ["ensemble"]}, "ensemble"),
        ({"diagnostic_options": {"points": [[0.1, 0.2]]}}, "diagnostic_options.points[0]"),
        ({"diagnostic_options": {"grid": {"bounds": [[1.0, -1.0]]}}}, "diagnostic_options.grid.bounds[0]"),
        ({"diagnostic_options": {"grid": {"resolution": 0}}}, "diagnostic_options.grid.resolution"),
    ],
)
def test_invalid_scenarios(overrides, field):
    with pytest.raises(ScenarioError) as error:
        ScenarioConfig(overrides).validate()
    assert error.value.field == field


def test_holland_rejects_stationary_initial_keys():
    config = config_with(state="sup:levels=0|1", law="holland", initial={"q0": [0.0]})
    with pytest.raises(ScenarioError) as error:
        config.validate()
    assert error.value.field == "initial.q0"


def test_holland_angles_must_avoid_the_poles():
    config = config_with(state="sup:levels=0|1", law="holland", initial={"angles": [0.0, 0.0, 0.0]})
    with pytest.raises(ScenarioError) as error:
        config.validate()
    assert error.value.field == "initial.angles"


def test_ensembles_need_cartesian_coordinates():
    config = config_with(
        state="product(ho:k=0, ho:k=0)", law="einstein", chart="polar", ensemble={"count": 1000}
    )
    with pytest.raises(ScenarioError) as error:
        config.validate()
    assert error.value.field == "chart"


def test_scenario_files(tmp_path):
    path = tmp_path / "osc.json"
    path.write_text(json.dumps({"name": "osc", "integrator": {"t_max": 2.0}}))
    config = ScenarioConfig()
    config.set_config_file(str(path))
    assert config.has_config()
    assert config.validate()["integrator"] == {"dt": 1e-3, "t_max": 2.0}

    saved = tmp_path / "effective.json"
    config.save(str(saved))
    assert json.loads(saved.read_text())["integrator"]["t_max"] == 2.0


def test_broken_scenario_files(tmp_path):
    config = ScenarioConfig()
    with pytest.raises(ScenarioError) as error:
        config.set_config_file(str(tmp_path / "missing.json"))
    assert error.value.field == "file"

    broken = tmp_path / "broken.json"
    broken.write_text("{ not json")
    with pytest.raises(ScenarioError) as error:
        config.set_config_file(str(broken))
    assert error.value.field == "file"
