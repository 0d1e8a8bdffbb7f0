"""
Built-in scenarios reproducing the replication experiments at desk scale.

Agents are listed by their best mean: agent 1 is the 0.5-agent, agent 5 the
0.9-agent. Horizon and repetitions default to T=10^5, R=100.
"""
from __future__ import annotations

import math
from typing import Dict, List, Optional

from strategic_bandits.errors import ConfigError
from strategic_bandits.models.instance import build_instance, summarize_gaps
from strategic_bandits.schemas.scenario import AgentSpec, PolicySpec, ScenarioConfig

SINGLE_MEANS = (0.5, 0.6, 0.7, 0.8, 0.9)
COMMON_SUBOPTIMAL = (0.2, 0.1)
DEFAULT_HORIZON = 10**5
DEFAULT_REPETITIONS = 100


def _single_arm_agents(copies: Dict[float, int]) -> List[AgentSpec]:
    return [AgentSpec(means=[mu], copies=[copies.get(mu, 1)]) for mu in SINGLE_MEANS]


def fig1_agents(replicas: int = 1, replicating_mean: float = 0.5) -> List[AgentSpec]:
    if replicating_mean not in SINGLE_MEANS:
        raise ValueError(f"unknown preset agent {replicating_mean}; choose one of {SINGLE_MEANS}")
    return _single_arm_agents({replicating_mean: replicas})


def fig2a_agents() -> List[AgentSpec]:
    return _single_arm_agents({0.5: 1000})


def fig2b_agents() -> List[AgentSpec]:
    return _single_arm_agents({mu: 1000 for mu in SINGLE_MEANS if mu != 0.9})


def fig2c_agents() -> List[AgentSpec]:
    agents = []
    for mu in SINGLE_MEANS:
        means = [mu, *COMMON_SUBOPTIMAL]
        if mu in (0.8, 0.9):
            copies = [10, 100, 100]
        else:
            copies = [1000, 1000, 1000]
        agents.append(AgentSpec(means=means, copies=copies))
    return agents


def toy_agents() -> List[AgentSpec]:
    return [AgentSpec(means=[0.7], copies=[1]), AgentSpec(means=[0.5], copies=[1])]


_AGENTS = {
    "fig1": fig1_agents,
    "fig1_high": lambda: fig1_agents(replicating_mean=0.9),
    "fig2a": fig2a_agents,
    "fig2b": fig2b_agents,
    "fig2c": fig2c_agents,
    "toy": toy_agents,
}


def preset_agents(tag: str) -> List[AgentSpec]:
    try:
        return _AGENTS[tag]()
    except KeyError:
        raise ValueError(f"unknown preset {tag!r}; available: {sorted(_AGENTS)}") from None


def default_L(agents: List[AgentSpec]) -> float:
    """Smallest integer L with L >= 1/c for these agents."""
    draft = ScenarioConfig(name="draft", horizon=max(len(agents), 1), agents=agents)
    gaps = summarize_gaps(build_instance(draft.profiles()))
    return float(math.ceil(1.0 / gaps.best_fraction - 1e-9))


def make_preset(
    tag: str,
    *,
    horizon: int = DEFAULT_HORIZON,
    repetitions: int = DEFAULT_REPETITIONS,
    policy: str = "ucb1",
    agents: Optional[List[AgentSpec]] = None,
    name: Optional[str] = None,
) -> ScenarioConfig:
    agents = agents if agents is not None else preset_agents(tag)
    originals = sum(len(a.means) for a in agents)
    return ScenarioConfig(
        name=name or tag,
        horizon=horizon,
        repetitions=repetitions,
        preset=tag,
        agents=agents,
        policy=PolicySpec(kind=policy, L=default_L(agents), l=float(originals)),
    )


def fig1_preset(replicas: int, replicating_mean: float = 0.5, **kwargs) -> ScenarioConfig:
    tag = "fig1" if replicating_mean == 0.5 else "fig1_high"
    agents = fig1_agents(replicas=replicas, replicating_mean=replicating_mean)
    return make_preset(tag, agents=agents, name=f"{tag}_k{replicas}", **kwargs)


def get_preset(tag: str) -> ScenarioConfig:
    """Built-in scenario by tag; unknown tags raise ConfigError."""
    if tag not in _AGENTS:
        raise ConfigError(f"unknown preset {tag!r}; available: {sorted(_AGENTS)}")
    if tag == "toy":
        return make_preset("toy", horizon=4, repetitions=1000)
    return make_preset(tag)


def builtin_presets() -> Dict[str, ScenarioConfig]:
    return {tag: get_preset(tag) for tag in _AGENTS}
