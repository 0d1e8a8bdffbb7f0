"""
Problem instances: original arms, agent strategies with replicas, reward draws
and the gap summary every regret computation is measured against.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from strategic_bandits.errors import EmptyStrategy, InvalidMean, InvalidProfile, UnknownArm


@dataclass(frozen=True, slots=True)
class OriginalArm:
    agent_id: int
    origin_index: int
    mean: float


@dataclass(frozen=True, slots=True)
class AgentProfile:
    """Agent i's strategy: its originals O_i and a copy count c_{i,k} for each.

    A copy count of zero hides that original.
    """

    agent_id: int
    originals: Tuple[OriginalArm, ...]
    copy_counts: Tuple[int, ...]

    @classmethod
    def from_means(cls, agent_id: int, means: Sequence[float], copies: Sequence[int]) -> "AgentProfile":
        originals = tuple(
            OriginalArm(agent_id=agent_id, origin_index=k, mean=float(mu))
            for k, mu in enumerate(means, start=1)
        )
        return cls(agent_id=agent_id, originals=originals, copy_counts=tuple(int(c) for c in copies))

    @property
    def best_mean(self) -> float:
        """μ*_i over the originals the agent actually registers."""
        return max(o.mean for o, c in zip(self.originals, self.copy_counts) if c > 0)


@dataclass(frozen=True, slots=True)
class RegisteredArm:
    arm_id: int
    agent_id: int
    origin_index: int
    copy_index: int
    mean: float


@dataclass(frozen=True)
class Instance:
    """The registered arm universe S = (S_1, ..., S_n).

    Agent ids run 1..n; arm ids are dense 0..arm_count-1. The numpy views
    (`means`, `arm_agent`, `agent_arms`) are what the policies index into.
    """

    agents: Tuple[AgentProfile, ...]
    arms: Tuple[RegisteredArm, ...]
    means: np.ndarray = field(repr=False)
    arm_agent: np.ndarray = field(repr=False)
    agent_arms: Tuple[np.ndarray, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def arm_count(self) -> int:
        return len(self.arms)

    @property
    def agent_ids(self) -> List[int]:
        return [p.agent_id for p in self.agents]

    def arms_of(self, agent_id: int) -> np.ndarray:
        return self.agent_arms[agent_id - 1]

    def agent_of(self, arm_id: int) -> int:
        if not 0 <= arm_id < self.arm_count:
            raise UnknownArm(arm_id)
        return int(self.arm_agent[arm_id]) + 1


@dataclass(frozen=True)
class GapSummary:
    mu_star: float
    per_arm_gap: np.ndarray = field(repr=False)
    per_agent_gap: Tuple[float, ...]
    agent_best: Tuple[float, ...]
    internal_gap: Tuple[Tuple[float, ...], ...]
    best_fraction: float
    agent_best_fraction: Tuple[float, ...]

    @property
    def optimal_agents(self) -> List[int]:
        return [i + 1 for i, gap in enumerate(self.per_agent_gap) if gap == 0.0]


@dataclass(frozen=True, slots=True)
class HistoryRecord:
    t: int
    arm_id: int
    agent_id: int
    reward: int


@dataclass(frozen=True)
class History:
    """Realised sequence (A_t, R_t) of one episode, stored column-wise.

    `agents` holds 1-based agent ids; row j is round t = j + 1.
    """

    arms: np.ndarray
    agents: np.ndarray
    rewards: np.ndarray

    def __len__(self) -> int:
        return len(self.arms)

    def __iter__(self) -> Iterator[HistoryRecord]:
        for j in range(len(self.arms)):
            yield HistoryRecord(
                t=j + 1,
                arm_id=int(self.arms[j]),
                agent_id=int(self.agents[j]),
                reward=int(self.rewards[j]),
            )

    @classmethod
    def from_records(cls, records: Sequence[Tuple[int, int, int]]) -> "History":
        """Build from (arm_id, agent_id, reward) triples in round order."""
        if not records:
            return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int8))
        arms, agents, rewards = zip(*records)
        return cls(
            arms=np.asarray(arms, dtype=np.int64),
            agents=np.asarray(agents, dtype=np.int64),
            rewards=np.asarray(rewards, dtype=np.int8),
        )


def _validate_profile(profile: AgentProfile) -> None:
    if len(profile.copy_counts) != len(profile.originals):
        raise InvalidProfile(
            f"agent {profile.agent_id}: {len(profile.copy_counts)} copy counts for "
            f"{len(profile.originals)} originals"
        )
    seen = set()
    for original in profile.originals:
        if not 0.0 <= original.mean <= 1.0:
            raise InvalidMean(
                f"agent {profile.agent_id}, original {original.origin_index}: mean {original.mean} not in [0, 1]"
            )
        if original.agent_id != profile.agent_id:
            raise InvalidProfile(f"original {original.origin_index} belongs to agent {original.agent_id}")
        if original.origin_index in seen:
            raise InvalidProfile(f"agent {profile.agent_id}: duplicate origin index {original.origin_index}")
        seen.add(original.origin_index)
    if any(c < 0 for c in profile.copy_counts):
        raise InvalidProfile(f"agent {profile.agent_id}: negative copy count")
    if sum(profile.copy_counts) < 1:
        raise EmptyStrategy(f"agent {profile.agent_id} registers no arm")


def build_instance(profiles: Sequence[AgentProfile]) -> Instance:
    """Expand agent strategies into registered arms.

    Arm ids follow (agent_id, origin_index, copy_index) lexical order, so the
    same profiles always produce the same ids.
    """
    if not profiles:
        raise InvalidProfile("an instance needs at least one agent")
    for profile in profiles:
        _validate_profile(profile)
    ordered = tuple(sorted(profiles, key=lambda p: p.agent_id))
    ids = [p.agent_id for p in ordered]
    if ids != list(range(1, len(ordered) + 1)):
        raise InvalidProfile(f"agent ids must be exactly 1..{len(ordered)}, got {ids}")

    arms: List[RegisteredArm] = []
    agent_arms: List[np.ndarray] = []
    for profile in ordered:
        start = len(arms)
        pairs = sorted(zip(profile.originals, profile.copy_counts), key=lambda pc: pc[0].origin_index)
        for original, copies in pairs:
            for copy_index in range(1, copies + 1):
                arms.append(
                    RegisteredArm(
                        arm_id=len(arms),
                        agent_id=profile.agent_id,
                        origin_index=original.origin_index,
                        copy_index=copy_index,
                        mean=original.mean,
                    )
                )
        agent_arms.append(np.arange(start, len(arms), dtype=np.int64))

    means = np.array([a.mean for a in arms], dtype=np.float64)
    arm_agent = np.array([a.agent_id - 1 for a in arms], dtype=np.int64)
    for view in (means, arm_agent, *agent_arms):
        view.setflags(write=False)
    return Instance(
        agents=ordered,
        arms=tuple(arms),
        means=means,
        arm_agent=arm_agent,
        agent_arms=tuple(agent_arms),
    )


def draw_reward(arm: RegisteredArm, rng: np.random.Generator) -> int:
    """Bernoulli(arm.mean) draw consuming exactly one uniform from `rng`."""
    return int(rng.random() < arm.mean)


def summarize_gaps(instance: Instance) -> GapSummary:
    # Hidden originals (c = 0) are not part of O_i for the gaps below.
    registered = [
        [o.mean for o, c in zip(p.originals, p.copy_counts) if c > 0] for p in instance.agents
    ]
    agent_best = tuple(max(ms) for ms in registered)
    mu_star = max(agent_best)
    internal_gap = tuple(tuple(best - mu for mu in ms) for best, ms in zip(agent_best, registered))

    fractions = []
    for idx, arm_ids in enumerate(instance.agent_arms):
        best_copies = int(np.count_nonzero(instance.means[arm_ids] == agent_best[idx]))
        fractions.append(best_copies / len(arm_ids))

    return GapSummary(
        mu_star=mu_star,
        per_arm_gap=mu_star - instance.means,
        per_agent_gap=tuple(mu_star - best for best in agent_best),
        agent_best=agent_best,
        internal_gap=internal_gap,
        best_fraction=min(fractions),
        agent_best_fraction=tuple(fractions),
    )
