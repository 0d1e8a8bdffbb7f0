"""
Episode orchestration: seeded repetitions, aggregation, sweeps and persistence.
Episode functions stay at module level: worker processes pickle them.
"""
import hashlib
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Union

import numpy as np

from strategic_bandits.config import get_settings
from strategic_bandits.errors import ConfigError
from strategic_bandits.models.instance import History, build_instance, draw_reward, summarize_gaps
from strategic_bandits.models.metrics import RunResult, checkpoint_grid, expected_utility, reduce_history
from strategic_bandits.models.policies import PolicyKind, PolicyRandom, init_state, policy_update, select
from strategic_bandits.schemas.results import AgentSummary, AggregateResult
from strategic_bandits.schemas.scenario import AgentSpec, ScenarioConfig
from strategic_bandits.storage.results_store import ResultsStore

logger = logging.getLogger(__name__)

REWARD_TAG = "rewards"


def stable_seed(base_seed: int, rep_index: int, tag: str) -> int:
    """64-bit seed from blake2b("<base_seed>:<rep_index>:<tag>"), stable across runs and platforms."""
    digest = hashlib.blake2b(f"{base_seed}:{rep_index}:{tag}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def episode_seeds(config: ScenarioConfig, rep_index: int) -> tuple:
    """(policy seed, reward seed) for one episode.

    In coupled mode the reward seed ignores the policy, so every policy sees
    the same per-round uniforms.
    """
    policy_tag = config.policy.kind.value
    policy_seed = stable_seed(config.base_seed, rep_index, policy_tag)
    reward_tag = REWARD_TAG if config.coupled else f"{REWARD_TAG}:{policy_tag}"
    return policy_seed, stable_seed(config.base_seed, rep_index, reward_tag)


def play_episode(config: ScenarioConfig, rep_index: int):
    """Run the round loop; returns (instance, gaps, history, policy seed)."""
    instance = build_instance(config.profiles())
    gaps = summarize_gaps(instance)
    policy_seed, reward_seed = episode_seeds(config, rep_index)
    policy_rng = PolicyRandom.from_seed(policy_seed)
    reward_rng = np.random.default_rng(reward_seed)
    state = init_state(
        config.policy.kind,
        instance,
        L=config.policy.L,
        l=config.subsample_ratio,
        horizon=config.horizon,
        fair_clock=config.policy.fair_clock,
        tie_break=config.policy.tie_break,
    )

    T = config.horizon
    arms = np.empty(T, dtype=np.int64)
    rewards = np.empty(T, dtype=np.int8)
    for j in range(T):
        arm = select(state, instance, policy_rng)
        reward = draw_reward(instance.arms[arm], reward_rng)
        policy_update(state, arm, reward)
        arms[j] = arm
        rewards[j] = reward
    history = History(arms=arms, agents=instance.arm_agent[arms] + 1, rewards=rewards)
    return instance, gaps, history, policy_seed


def run_episode(config: ScenarioConfig, rep_index: int) -> RunResult:
    started = time.perf_counter()
    instance, gaps, history, seed = play_episode(config, rep_index)
    return reduce_history(
        history,
        instance,
        gaps,
        config.discount.build(config.horizon),
        checkpoint_grid(config.horizon, config.checkpoints),
        seed=seed,
        rep_index=rep_index,
        wall_clock=time.perf_counter() - started,
    )

def with_replicas(config: ScenarioConfig, agent_id: int, replicas: int) -> ScenarioConfig:
    """Scale every copy count of `agent_id` to `replicas` (hidden originals stay hidden).

    Raises:
        ConfigError: If `agent_id` is not an agent of the scenario
    """
    if not 1 <= agent_id <= len(config.agents):
        raise ConfigError(f"agent {agent_id} is out of range: the scenario has agents 1..{len(config.agents)}")
    agents = [a.model_copy(deep=True) for a in config.agents]
    target = agents[agent_id - 1]
    agents[agent_id - 1] = AgentSpec(means=target.means, copies=[replicas if c > 0 else 0 for c in target.copies])
    return config.model_copy(update={"agents": agents, "name": f"{config.name}_k{replicas}"})


def _std(values: np.ndarray) -> np.ndarray:
    if values.shape[0] < 2:
        return np.zeros(values.shape[1:])
    return values.std(axis=0, ddof=1)


class SimulationController:
    """
    Controller for running, aggregating and persisting Monte Carlo experiments
    """

    def __init__(self, store: Optional[ResultsStore] = None, threads: Optional[int] = None):
        self.store = store
        self.threads = threads

    def run_episodes(self, config: ScenarioConfig) -> List[RunResult]:
        """
        Run every repetition, in worker processes when more than one thread is configured

        Args:
            config: The scenario to play

        Returns:
            One RunResult per repetition, in rep_index order
        """
        threads = self.threads or get_settings().threads
        reps = range(config.repetitions)
        if threads <= 1 or config.repetitions == 1:
            return [run_episode(config, rep) for rep in reps]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(run_episode, [config] * config.repetitions, reps))

    def aggregate(self, config: ScenarioConfig, episodes: Sequence[RunResult], wall_clock: float = 0.0) -> AggregateResult:
        """
        Deterministic reduction over episodes ordered by rep_index

        Args:
            config: The scenario the episodes were played under
            episodes: Per-repetition results, in any order
            wall_clock: Seconds spent producing the episodes

        Returns:
            Mean and standard deviation of every trajectory plus per-agent summaries
        """
        episodes = sorted(episodes, key=lambda e: e.rep_index)
        regret = np.stack([e.regret_trajectory for e in episodes])
        finals = np.array([[e.final_regret] for e in episodes])
        revenue = np.stack([e.revenue_trajectory for e in episodes])
        final_revenue = np.stack([e.agent_revenue for e in episodes])
        final_counts = np.stack([e.final_counts for e in episodes])

        utility = config.utility.build()
        agents = []
        for idx in range(revenue.shape[1]):
            estimate = expected_utility(episodes, idx + 1, utility)
            agents.append(
                AgentSummary(
                    agent_id=idx + 1,
                    revenue_mean=revenue[:, idx, :].mean(axis=0).tolist(),
                    revenue_std=_std(revenue[:, idx, :]).tolist(),
                    final_revenue_mean=float(final_revenue[:, idx].mean()),
                    final_revenue_std=float(_std(final_revenue[:, idx : idx + 1])[0]),
                    final_count_mean=float(final_counts[:, idx].mean()),
                    utility_mean=estimate.mean,
                    utility_lower=estimate.lower,
                    utility_upper=estimate.upper,
                )
            )
        instance = build_instance(config.profiles())
        return AggregateResult(
            name=config.name,
            policy=config.policy.kind.value,
            horizon=config.horizon,
            repetitions=len(episodes),
            checkpoints=episodes[0].checkpoints.tolist(),
            mean_regret=regret.mean(axis=0).tolist(),
            std_regret=_std(regret).tolist(),
            final_regret_mean=float(finals.mean()),
            final_regret_std=float(_std(finals)[0]),
            agents=agents,
            seeds=[e.seed for e in episodes],
            wall_clock=wall_clock,
            metadata={
                "L": config.policy.L,
                "l": config.subsample_ratio,
                "fair_clock": config.policy.fair_clock,
                "tie_break": config.policy.tie_break,
                "coupled": config.coupled,
                "base_seed": config.base_seed,
                "arm_count": instance.arm_count,
                "agent_arm_counts": [len(ids) for ids in instance.agent_arms],
            },
        )

    def run_experiment(self, config: ScenarioConfig) -> AggregateResult:
        """
        Run R episodes, aggregate them, and persist when the controller has a store

        Args:
            config: The scenario to run

        Returns:
            The aggregate result

        Raises:
            OSError: If the result files cannot be written
        """
        logger.info(
            f"Running {config.name} with {config.policy.kind.value}: T={config.horizon}, R={config.repetitions}"
        )
        started = time.perf_counter()
        episodes = self.run_episodes(config)
        result = self.aggregate(config, episodes, wall_clock=time.perf_counter() - started)
        logger.info(
            f"{config.name}/{result.policy}: final regret {result.final_regret_mean:.2f} "
            f"± {result.final_regret_std:.2f} in {result.wall_clock:.1f}s"
        )
        if self.store is not None:
            self.store.save(result, config)
        return result

    def sweep(
        self,
        config: ScenarioConfig,
        axis: Sequence[Union[int, str, PolicyKind]],
        agent_id: int = 1,
    ) -> List[AggregateResult]:
        """
        One AggregateResult per axis point, all sharing `config.base_seed`

        Args:
            config: The base scenario
            axis: Replica counts for `agent_id`'s arms, or policy names
            agent_id: Agent whose arms integer points replicate

        Returns:
            Results in axis order

        Raises:
            ValueError: If the axis is empty
            ConfigError: If `agent_id` is not an agent of the scenario
        """
        if not axis:
            raise ValueError("sweep axis must not be empty")
        results = []
        for point in axis:
            if isinstance(point, (int, np.integer)) and not isinstance(point, bool):
                point_config = with_replicas(config, agent_id, int(point))
            else:
                point_config = config.with_overrides(kind=PolicyKind(point).value)
            results.append(self.run_experiment(point_config))
        return results
