from typing import List

from strategic_bandits.models.instance import build_instance
from strategic_bandits.models.presets import builtin_presets, get_preset
from strategic_bandits.schemas.results import PresetSummary
from strategic_bandits.schemas.scenario import ScenarioConfig


def summarize(config: ScenarioConfig) -> PresetSummary:
    instance = build_instance(config.profiles())
    return PresetSummary(
        name=config.name,
        agents=instance.n,
        arms=instance.arm_count,
        originals=config.original_count,
        horizon=config.horizon,
        repetitions=config.repetitions,
        L=config.policy.L,
        l=config.policy.l,
    )


class PresetController:
    """
    Controller for the built-in scenario catalogue
    """

    def list_presets(self) -> List[PresetSummary]:
        return [summarize(config) for config in builtin_presets().values()]

    def get_preset(self, name: str) -> ScenarioConfig:
        """
        Raises:
            ConfigError: If the preset is unknown
        """
        return get_preset(name)
