"""
Selection policies as state machines with a uniform select/update interface.

Every selector has the shape `select(state, instance, rng) -> arm_id` and every
round is closed by `policy_update(state, arm_id, reward)`. Randomness only
enters through uniform integer draws (`rng.agent.integers(k)` for agent-level
choices, `rng.arm.integers(k)` for arm-level choices and subsampling), so a
scripted stream can enumerate every branch a policy may take.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Protocol, Sequence

import numpy as np

from strategic_bandits.errors import StaleUpdate
from strategic_bandits.models.instance import Instance

TIE_TOLERANCE = 1e-12


class PolicyKind(str, Enum):
    UCB1 = "ucb1"
    FairUCB1 = "fair"
    SUCB = "sucb"
    HUCB = "hucb"
    RHUCB = "rhucb"
    PRHUCB = "prhucb"

    @property
    def hierarchical(self) -> bool:
        return self in (PolicyKind.HUCB, PolicyKind.RHUCB, PolicyKind.PRHUCB)


class UniformStream(Protocol):
    def integers(self, high: int) -> int: ...


@dataclass
class PolicyRandom:
    """Independent draw streams for agent-level and arm-level choices."""

    agent: UniformStream
    arm: UniformStream

    @classmethod
    def coerce(cls, rng) -> "PolicyRandom":
        if isinstance(rng, PolicyRandom):
            return rng
        return cls(agent=rng, arm=rng)

    @classmethod
    def from_seed(cls, seed) -> "PolicyRandom":
        agent_seq, arm_seq = np.random.SeedSequence(seed).spawn(2)
        return cls(agent=np.random.default_rng(agent_seq), arm=np.random.default_rng(arm_seq))


@dataclass(frozen=True, slots=True)
class ArmStats:
    n: int
    r: float


@dataclass(frozen=True, slots=True)
class AgentStats:
    N: int
    R: float


@dataclass
class PolicyHyper:
    L: float = 1.0
    l: float = 1.0
    horizon: int = 2
    fair_clock: str = "local"
    tie_break: str = "uniform"


@dataclass
class PolicyState:
    """Sufficient statistics of one policy over one episode.

    `t` counts completed rounds, so the round being played is `t + 1`.
    `subsample` is None until the first select for the subsampling policies;
    it maps agent index to a list of arm ids for RH-UCB/PRH-UCB and holds the
    single key -1 for S-UCB's global sample.
    """

    kind: PolicyKind
    arm_n: np.ndarray
    arm_r: np.ndarray
    agent_N: np.ndarray
    agent_R: np.ndarray
    arm_agent: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0, dtype=np.int64))
    hyper: PolicyHyper = field(default_factory=PolicyHyper)
    subsample: Optional[Dict[int, List[int]]] = None
    reserve: Optional[Dict[int, List[int]]] = None
    t: int = 0
    pending: Optional[int] = None

    def clone(self) -> "PolicyState":
        return PolicyState(
            kind=self.kind,
            arm_n=self.arm_n.copy(),
            arm_r=self.arm_r.copy(),
            agent_N=self.agent_N.copy(),
            agent_R=self.agent_R.copy(),
            arm_agent=self.arm_agent,
            hyper=self.hyper,
            subsample=None if self.subsample is None else {k: list(v) for k, v in self.subsample.items()},
            reserve=None if self.reserve is None else {k: list(v) for k, v in self.reserve.items()},
            t=self.t,
            pending=self.pending,
        )

    def arm_stats(self, arm_id: int) -> ArmStats:
        return ArmStats(n=int(self.arm_n[arm_id]), r=float(self.arm_r[arm_id]))

    def agent_stats(self, agent_id: int) -> AgentStats:
        return AgentStats(N=int(self.agent_N[agent_id - 1]), R=float(self.agent_R[agent_id - 1]))

    def subsample_of(self, agent_id: int) -> List[int]:
        if self.subsample is None:
            return []
        return list(self.subsample.get(agent_id - 1, []))


def init_state(
    kind: PolicyKind,
    instance: Instance,
    *,
    L: float = 1.0,
    l: float = 1.0,
    horizon: int = 2,
    fair_clock: str = "local",
    tie_break: str = "uniform",
) -> PolicyState:
    kind = PolicyKind(kind)
    if L <= 0 or l <= 0:
        raise ValueError("subsampling hyperparameters L and l must be positive")
    if fair_clock not in ("local", "global"):
        raise ValueError(f"unknown fair clock {fair_clock!r}")
    if tie_break not in ("uniform", "first"):
        raise ValueError(f"unknown tie-break rule {tie_break!r}")
    return PolicyState(
        kind=kind,
        arm_n=np.zeros(instance.arm_count, dtype=np.int64),
        arm_r=np.zeros(instance.arm_count, dtype=np.float64),
        agent_N=np.zeros(instance.n, dtype=np.int64),
        agent_R=np.zeros(instance.n, dtype=np.float64),
        arm_agent=instance.arm_agent,
        hyper=PolicyHyper(L=L, l=l, horizon=max(int(horizon), 1), fair_clock=fair_clock, tie_break=tie_break),
    )


# Index functions


def _log(t: float) -> float:
    return math.log(t) if t > 1.0 else 0.0


def ucb_index(r, n, t: float):
    """r + sqrt(2 ln t / n); vectorises over numpy arrays of (r, n)."""
    return r + np.sqrt(2.0 * _log(t) / n)


def hucb_agent_index(stats: AgentStats, t: float) -> float:
    return stats.R + math.sqrt(2.0 * _log(t) / stats.N)


def rhucb_agent_index(stats: AgentStats, t: float) -> float:
    return stats.R + math.sqrt(math.sqrt(t) * _log(t) / stats.N)


def prhucb_agent_index(stats: AgentStats, t: float) -> float:
    return stats.R + math.sqrt(math.sqrt(t * _log(t) ** 3) / stats.N)


def _agent_bonus(kind: PolicyKind, t: float, N: np.ndarray) -> np.ndarray:
    log_t = _log(t)
    if kind is PolicyKind.HUCB:
        scale = 2.0 * log_t
    elif kind is PolicyKind.RHUCB:
        scale = math.sqrt(t) * log_t
    else:
        scale = math.sqrt(t * log_t**3)
    return np.sqrt(scale / N)


# Choice helpers


def _pick(rng: UniformStream, candidates: Sequence[int], tie_break: str = "uniform") -> int:
    if len(candidates) == 1 or tie_break == "first":
        return int(candidates[0])
    return int(candidates[int(rng.integers(len(candidates)))])


def _argmax(values: np.ndarray, ids: np.ndarray, rng: UniformStream, tie_break: str) -> int:
    best = values.max()
    return _pick(rng, ids[values >= best - TIE_TOLERANCE], tie_break)


def _ucb_over(state: PolicyState, ids: np.ndarray, clock: float, rng: UniformStream) -> int:
    """UCB1 restricted to `ids`: unexplored first, then the index argmax."""
    counts = state.arm_n[ids]
    unexplored = ids[counts == 0]
    if len(unexplored):
        return _pick(rng, unexplored, state.hyper.tie_break)
    index = ucb_index(state.arm_r[ids], counts, clock)
    return _argmax(index, ids, rng, state.hyper.tie_break)


def _select_agent(state: PolicyState, rng: UniformStream) -> int:
    """Phase 1 of the hierarchical policies; returns a 0-based agent index.

    Depends only on the per-agent statistics, the round and the agent stream.
    """
    agents = np.arange(len(state.agent_N))
    unexplored = agents[state.agent_N == 0]
    if len(unexplored):
        return _pick(rng, unexplored, state.hyper.tie_break)
    t = state.t + 1
    index = state.agent_R + _agent_bonus(state.kind, t, state.agent_N)
    return _argmax(index, agents, rng, state.hyper.tie_break)


def _sample_without_replacement(pool: Sequence[int], size: int, rng: UniformStream) -> List[int]:
    """Partial Fisher-Yates over a copy of `pool`, one uniform draw per pick."""
    pool = list(pool)
    if size >= len(pool):
        return pool
    chosen = []
    for j in range(size):
        k = j + int(rng.integers(len(pool) - j))
        pool[j], pool[k] = pool[k], pool[j]
        chosen.append(pool[j])
    return sorted(chosen)


def subsample_size(factor: float, horizon: int, population: int) -> int:
    """min(population, ceil(factor ln T)), never below one arm."""
    return min(population, max(1, math.ceil(factor * _log(horizon))))


# Selectors


def ucb1_select(state: PolicyState, instance: Instance, rng) -> int:
    rng = PolicyRandom.coerce(rng)
    ids = np.arange(instance.arm_count)
    return _finish(state, _ucb_over(state, ids, state.t + 1, rng.arm))


def fair_select(state: PolicyState, instance: Instance, rng) -> int:
    rng = PolicyRandom.coerce(rng)
    agent = int(rng.agent.integers(instance.n)) if instance.n > 1 else 0
    if state.hyper.fair_clock == "local":
        clock = state.agent_N[agent] + 1
    else:
        clock = state.t + 1
    return _finish(state, _ucb_over(state, instance.agent_arms[agent], clock, rng.arm))


def sucb_init(instance: Instance, l: float, T: int, rng) -> List[int]:
    rng = PolicyRandom.coerce(rng)
    size = subsample_size(l, T, instance.arm_count)
    return _sample_without_replacement(range(instance.arm_count), size, rng.arm)


def sucb_select(state: PolicyState, instance: Instance, rng) -> int:
    rng = PolicyRandom.coerce(rng)
    if state.subsample is None:
        state.subsample = {-1: sucb_init(instance, state.hyper.l, state.hyper.horizon, rng)}
    ids = np.asarray(state.subsample[-1], dtype=np.int64)
    return _finish(state, _ucb_over(state, ids, state.t + 1, rng.arm))


def hucb_select(state: PolicyState, instance: Instance, rng) -> int:
    rng = PolicyRandom.coerce(rng)
    agent = _select_agent(state, rng.agent)
    ids = instance.agent_arms[agent]
    return _finish(state, _ucb_over(state, ids, state.agent_N[agent], rng.arm))


def rhucb_init(instance: Instance, L: float, T: int, rng) -> Dict[int, List[int]]:
    """Per-agent uniform subsample B_i of size min(|S_i|, ceil(L ln T))."""
    rng = PolicyRandom.coerce(rng)
    subsample = {}
    for agent, ids in enumerate(instance.agent_arms):
        size = subsample_size(L, T, len(ids))
        subsample[agent] = _sample_without_replacement(ids.tolist(), size, rng.arm)
    return subsample


def rhucb_select(state: PolicyState, instance: Instance, rng) -> int:
    rng = PolicyRandom.coerce(rng)
    if state.subsample is None:
        state.subsample = rhucb_init(instance, state.hyper.L, state.hyper.horizon, rng)
    agent = _select_agent(state, rng.agent)
    ids = np.asarray(state.subsample[agent], dtype=np.int64)
    return _finish(state, _ucb_over(state, ids, state.agent_N[agent], rng.arm))


def prhucb_select(state: PolicyState, instance: Instance, rng) -> int:
    rng = PolicyRandom.coerce(rng)
    if state.subsample is None:
        state.subsample = {agent: [] for agent in range(instance.n)}
        state.reserve = {agent: ids.tolist() for agent, ids in enumerate(instance.agent_arms)}
    agent = _select_agent(state, rng.agent)
    members = state.subsample[agent]
    reserve = state.reserve[agent]
    t = state.t + 1
    limit = min(len(instance.agent_arms[agent]), _log(t) ** 2)
    # An agent's first selection always admits one arm, whatever ln^2 t is.
    if reserve and (not members or len(members) < limit):
        k = int(rng.arm.integers(len(reserve))) if len(reserve) > 1 else 0
        reserve[k], reserve[-1] = reserve[-1], reserve[k]
        arm = reserve.pop()
        members.append(arm)
        return _finish(state, arm)
    ids = np.asarray(members, dtype=np.int64)
    return _finish(state, _ucb_over(state, ids, state.agent_N[agent], rng.arm))


SELECTORS: Dict[PolicyKind, Callable[[PolicyState, Instance, object], int]] = {
    PolicyKind.UCB1: ucb1_select,
    PolicyKind.FairUCB1: fair_select,
    PolicyKind.SUCB: sucb_select,
    PolicyKind.HUCB: hucb_select,
    PolicyKind.RHUCB: rhucb_select,
    PolicyKind.PRHUCB: prhucb_select,
}


def select(state: PolicyState, instance: Instance, rng) -> int:
    return SELECTORS[state.kind](state, instance, rng)


def _finish(state: PolicyState, arm_id: int) -> int:
    if state.pending is not None:
        raise StaleUpdate(f"round {state.t + 1}: arm {state.pending} was selected but never updated")
    state.pending = int(arm_id)
    return int(arm_id)


def policy_update(state: PolicyState, arm_id: int, reward: int) -> PolicyState:
    """Close the round: incremental-mean updates of r, n, R, N and t += 1."""
    if state.pending is None or state.pending != arm_id:
        raise StaleUpdate(f"update for arm {arm_id} does not match pending selection {state.pending}")
    agent = state.arm_agent[arm_id]
    n = state.arm_n[arm_id]
    state.arm_r[arm_id] = (state.arm_r[arm_id] * n + reward) / (n + 1)
    state.arm_n[arm_id] = n + 1
    N = state.agent_N[agent]
    state.agent_R[agent] = (state.agent_R[agent] * N + reward) / (N + 1)
    state.agent_N[agent] = N + 1
    state.t += 1
    state.pending = None
    return state
