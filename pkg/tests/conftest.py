import pytest

from builders import PASS_SPEC
from soccerevents.components.scenario_generation import generate_scenario, scenario_suite
from soccerevents.entity.config_entity import RuleParameterSet


@pytest.fixture(scope="session")
def reference_params():
    return RuleParameterSet.reference()


@pytest.fixture(scope="session")
def pass_scenario():
    """Clean pass from player 2 to player 3 along y = 20: kick at frame 20, received at frame 65."""
    return generate_scenario(PASS_SPEC)


@pytest.fixture(scope="session")
def suite_scenarios():
    """Seventeen rounds of every scenario kind, each generated on its own."""
    return [(spec, *generate_scenario(spec)) for spec in scenario_suite(204, seed=5)]
