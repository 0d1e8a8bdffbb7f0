import pytest

from strategic_bandits.models.instance import build_instance
from strategic_bandits.schemas.scenario import AgentSpec, PolicySpec, ScenarioConfig
from strategic_bandits.storage.results_store import ResultsStore

from tests.helpers import FIG1_MEANS, single_arm_profiles


@pytest.fixture
def fig1_instance():
    return build_instance(single_arm_profiles(FIG1_MEANS))


@pytest.fixture
def small_config():
    return ScenarioConfig(
        name="small",
        horizon=60,
        repetitions=4,
        base_seed=11,
        checkpoints=10,
        policy=PolicySpec(kind="hucb", L=2.0),
        agents=[
            AgentSpec(means=[0.5], copies=[3]),
            AgentSpec(means=[0.8, 0.2], copies=[1, 2]),
            AgentSpec(means=[0.6], copies=[1]),
        ],
    )


@pytest.fixture
def store(tmp_path):
    return ResultsStore(tmp_path / "results")
