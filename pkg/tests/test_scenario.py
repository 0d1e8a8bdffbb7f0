import pytest

from strategic_bandits.errors import ConfigError
from strategic_bandits.models.policies import PolicyKind
from strategic_bandits.schemas.scenario import load_scenario, parse_scenario

CUSTOM = """\
[scenario]
name = "custom"
horizon = 100
repetitions = 3
seed = 9

[policy]
kind = "rhucb"
L = 4

[[agent]]
means = [0.5]
copies = [3]

[[agent]]
means = [0.9, 0.2]
copies = [1, 5]
"""


class TestParseScenario:
    def test_custom_document(self):
        config = parse_scenario(CUSTOM)
        assert config.name == "custom"
        assert config.base_seed == 9
        assert config.policy.kind is PolicyKind.RHUCB
        assert config.policy.L == 4
        assert config.original_count == 3
        assert config.subsample_ratio == 3.0
        assert [len(p.originals) for p in config.profiles()] == [1, 2]

    def test_preset_agents(self):
        config = parse_scenario('[scenario]\nname = "p"\nhorizon = 50\n\n[agents]\npreset = "fig2c"\n')
        assert len(config.agents) == 5
        assert config.agents[3].copies == [10, 100, 100]

    def test_invalid_agent_reports_its_block(self):
        text = CUSTOM.replace("means = [0.9, 0.2]", "means = [1.5, 0.2]")
        with pytest.raises(ConfigError) as excinfo:
            parse_scenario(text)
        assert excinfo.value.line == 15
        assert str(excinfo.value).startswith("line 15:")

    def test_invalid_policy_reports_section(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_scenario(CUSTOM.replace("L = 4", "L = -1"))
        assert excinfo.value.line == 7

    def test_toml_syntax_error(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_scenario('[scenario]\nname = \nhorizon = 3\n')
        assert excinfo.value.line == 2

    def test_unknown_scenario_key(self):
        with pytest.raises(ConfigError, match="unknown"):
            parse_scenario('[scenario]\nname = "x"\nhorizon = 5\nspeed = 2\n[agents]\npreset = "toy"\n')

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="unknown preset"):
            parse_scenario('[scenario]\nname = "x"\nhorizon = 5\n\n[agents]\npreset = "nope"\n')

    def test_horizon_below_agent_count(self):
        with pytest.raises(ConfigError):
            parse_scenario('[scenario]\nname = "x"\nhorizon = 1\n\n[agents]\npreset = "toy"\n')

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_scenario(tmp_path / "absent.toml")


class TestOverrides:
    def test_policy_and_horizon(self):
        config = parse_scenario(CUSTOM).with_overrides(horizon=20, kind="ucb1", L=None, coupled=False)
        assert config.horizon == 20
        assert config.policy.kind is PolicyKind.UCB1
        assert config.policy.L == 4
        assert config.coupled is False

    def test_invalid_override(self):
        with pytest.raises(ConfigError):
            parse_scenario(CUSTOM).with_overrides(repetitions=0)

    def test_discount_and_utility_build(self):
        text = CUSTOM + '\n[discount]\nkind = "geometric"\nrho = 0.5\n\n[utility]\nshape = "concave"\np = 0.5\n'
        config = parse_scenario(text)
        assert config.discount.build(3).gammas.tolist() == [1.0, 0.5, 0.25]
        assert config.utility.build()(4.0) == pytest.approx(2.0)


THREE_AGENTS = """\
[scenario]
name = "discounted"
horizon = 6

[[agent]]
means = [0.5]
copies = [1]

[[agent]]
means = [0.6]
copies = [1]

[[agent]]
means = [0.7]
copies = [1]

[discount]
kind = "explicit"
"""


class TestDiscountValidation:
    def test_needs_a_positive_weight_per_agent(self):
        with pytest.raises(ConfigError, match="at least 3 positive entries"):
            parse_scenario(THREE_AGENTS + "gammas = [1, 0, 0, 0, 0, 0]\n")

    def test_one_positive_weight_per_agent_is_enough(self):
        config = parse_scenario(THREE_AGENTS + "gammas = [1, 1, 0.5, 0, 0, 0]\n")
        assert config.discount.build(6).gammas.tolist() == [1.0, 1.0, 0.5, 0.0, 0.0, 0.0]

    def test_short_explicit_sequence(self):
        with pytest.raises(ConfigError, match="at least 6 weights"):
            parse_scenario(THREE_AGENTS + "gammas = [1, 1, 1]\n")

    def test_horizon_override_revalidates(self):
        config = parse_scenario(THREE_AGENTS + "gammas = [1, 1, 1, 1, 1, 1]\n")
        with pytest.raises(ConfigError):
            config.with_overrides(horizon=12)
