"""
Exact small-horizon verification.

Enumerates every reward realisation and every uniform draw a policy can make
(initialisation picks, tie-breaks, subsampling) to obtain the exact law of each
agent's t-count N_{S_i,t}, then compares laws by first-order stochastic
dominance. A policy is re-executed against a scripted stream: when it asks for
a draw past the end of the script, the enumeration forks once per outcome.
"""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from strategic_bandits.errors import TooLarge
from strategic_bandits.models.instance import AgentProfile, Instance, build_instance
from strategic_bandits.models.policies import (
    PolicyKind,
    PolicyRandom,
    init_state,
    policy_update,
    select,
    subsample_size,
)

logger = logging.getLogger(__name__)

MAX_HORIZON = 6
DEFAULT_PATH_LIMIT = 10**7
CDF_TOLERANCE = 1e-9


class Dominance(str, Enum):
    STRICT = "strictly_dominates"
    WEAK = "dominates"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class ExactDistribution:
    """Law of an integer count as sorted (value, probability) pairs."""

    support: Tuple[Tuple[int, float], ...]

    def __post_init__(self):
        total = sum(p for _, p in self.support)
        if any(p < 0 for _, p in self.support) or abs(total - 1.0) > CDF_TOLERANCE:
            raise ValueError(f"probabilities must be non-negative and sum to 1 (got {total})")

    @classmethod
    def from_mapping(cls, mass: Dict[int, float]) -> "ExactDistribution":
        return cls(tuple(sorted((int(k), float(p)) for k, p in mass.items() if p > 0)))

    def pmf(self, value: int) -> float:
        return dict(self.support).get(value, 0.0)

    def cdf(self, value: int) -> float:
        return sum(p for k, p in self.support if k <= value)

    def mean(self) -> float:
        return sum(k * p for k, p in self.support)

    def equals(self, other: "ExactDistribution", tol: float = CDF_TOLERANCE) -> bool:
        points = _points(self, other)
        return all(abs(self.cdf(x) - other.cdf(x)) <= tol for x in points)


def _points(a: ExactDistribution, b: ExactDistribution) -> List[int]:
    return sorted({k for k, _ in a.support} | {k for k, _ in b.support})


@dataclass
class ExactLaws:
    """laws[t][agent_id] for t = 1..t_max."""

    t_max: int
    laws: Dict[int, Dict[int, ExactDistribution]]
    paths: int

    def at(self, t: int, agent_id: int) -> ExactDistribution:
        return self.laws[t][agent_id]


class _NeedsDraw(Exception):
    def __init__(self, arity: int):
        self.arity = arity


class _ScriptedStream:
    """Answers draws from a fixed script; asks for a fork once it runs out."""

    def __init__(self, script: Sequence[int]):
        self.script = script
        self.pos = 0

    def integers(self, high: int) -> int:
        if self.pos < len(self.script):
            value = self.script[self.pos]
            self.pos += 1
            return value
        raise _NeedsDraw(int(high))


def path_bound(
    instance: Instance,
    kind: PolicyKind,
    t_max: int,
    *,
    L: float = 1.0,
    l: float = 1.0,
) -> int:
    """Upper bound on enumerated paths.

    (2 · choices per round)^t_max, times the ordered subsample draws S-UCB and
    RH-UCB make before their first round.
    """
    kind = PolicyKind(kind)
    horizon = max(t_max, 2)
    widest = max(len(ids) for ids in instance.agent_arms)
    if kind in (PolicyKind.UCB1, PolicyKind.SUCB):
        branching = instance.arm_count
    else:
        branching = instance.n * widest
    init = 1
    if kind is PolicyKind.SUCB:
        size = subsample_size(l, horizon, instance.arm_count)
        if size < instance.arm_count:
            init = math.perm(instance.arm_count, size)
    elif kind is PolicyKind.RHUCB:
        for ids in instance.agent_arms:
            size = subsample_size(L, horizon, len(ids))
            if size < len(ids):
                init *= math.perm(len(ids), size)
    return init * (2 * branching) ** t_max


def enumerate_exact(
    instance: Instance,
    policy_kind: PolicyKind,
    t_max: int,
    *,
    L: float = 1.0,
    l: float = 1.0,
    tie_break: str = "uniform",
    fair_clock: str = "local",
    path_limit: int = DEFAULT_PATH_LIMIT,
) -> ExactLaws:
    kind = PolicyKind(policy_kind)
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    if t_max > MAX_HORIZON:
        raise TooLarge(f"t_max={t_max} exceeds the exact horizon cap of {MAX_HORIZON}")
    bound = path_bound(instance, kind, t_max, L=L, l=l)
    if bound > path_limit:
        raise TooLarge(f"{bound} potential paths for t_max={t_max} exceed the guard of {path_limit}")

    mass: Dict[int, Dict[int, Dict[int, float]]] = {
        t: {a: defaultdict(float) for a in instance.agent_ids} for t in range(1, t_max + 1)
    }
    root = init_state(
        kind, instance, L=L, l=l, horizon=max(t_max, 2), tie_break=tie_break, fair_clock=fair_clock
    )
    paths = 0

    def play(state, prob: float, counts: Tuple[int, ...], script: List[int]) -> None:
        nonlocal paths
        trial = state.clone()
        stream = _ScriptedStream(script)
        try:
            arm = select(trial, instance, PolicyRandom(agent=stream, arm=stream))
        except _NeedsDraw as fork:
            for k in range(fork.arity):
                play(state, prob / fork.arity, counts, script + [k])
            return

        t = trial.t + 1
        agent = instance.agent_of(arm)
        after = tuple(c + (1 if a == agent else 0) for a, c in zip(instance.agent_ids, counts))
        mean = instance.arms[arm].mean
        for reward, weight in ((1, mean), (0, 1.0 - mean)):
            if weight <= 0.0:
                continue
            child = trial.clone()
            policy_update(child, arm, reward)
            p = prob * weight
            for a, c in zip(instance.agent_ids, after):
                mass[t][a][c] += p
            if t < t_max:
                play(child, p, after, [])
            else:
                paths += 1
                if paths > path_limit:
                    raise TooLarge(f"enumeration passed the guard of {path_limit} paths at t_max={t_max}")

    play(root, 1.0, tuple(0 for _ in instance.agent_ids), [])
    laws = {
        t: {a: ExactDistribution.from_mapping(mass[t][a]) for a in instance.agent_ids}
        for t in range(1, t_max + 1)
    }
    logger.debug(f"enumerated {paths} paths for {kind.value} up to t={t_max}")
    return ExactLaws(t_max=t_max, laws=laws, paths=paths)


def dominance_check(a: ExactDistribution, b: ExactDistribution, tol: float = CDF_TOLERANCE) -> Dominance:
    """Does `a` first-order dominate `b`: P[A ≤ x] ≤ P[B ≤ x] for every x?"""
    gaps = [a.cdf(x) - b.cdf(x) for x in _points(a, b)]
    if any(g > tol for g in gaps):
        return Dominance.INCOMPARABLE
    if any(g < -tol for g in gaps):
        return Dominance.STRICT
    return Dominance.WEAK


def duplicate_agent(profiles: Sequence[AgentProfile], agent_id: int) -> List[AgentProfile]:
    """Copy every registered arm of `agent_id` once more (c_{i,k} -> 2 c_{i,k})."""
    out = []
    for p in profiles:
        if p.agent_id == agent_id:
            p = AgentProfile(agent_id=p.agent_id, originals=p.originals, copy_counts=tuple(2 * c for c in p.copy_counts))
        out.append(p)
    return out


class Verdict(str, Enum):
    PRONE = "prone"
    INVARIANT = "invariant"
    NOT_PRONE = "not_prone"


@dataclass
class AgentCertificate:
    agent_id: int
    relations: List[str]
    equal: List[bool]
    original_means: List[float] = field(default_factory=list)
    replicated_means: List[float] = field(default_factory=list)

    @property
    def verdict(self) -> Verdict:
        if all(self.equal):
            return Verdict.INVARIANT
        weak = all(r in (Dominance.WEAK.value, Dominance.STRICT.value) for r in self.relations)
        if weak and any(r == Dominance.STRICT.value for r in self.relations):
            return Verdict.PRONE
        return Verdict.NOT_PRONE


@dataclass
class PronenessReport:
    policy: str
    t_max: int
    agents: List[AgentCertificate]

    @property
    def verdict(self) -> Verdict:
        verdicts = {a.verdict for a in self.agents}
        if verdicts == {Verdict.INVARIANT}:
            return Verdict.INVARIANT
        if verdicts == {Verdict.PRONE}:
            return Verdict.PRONE
        return Verdict.NOT_PRONE

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "t_max": self.t_max,
            "verdict": self.verdict.value,
            "agents": [
                {
                    "agent_id": a.agent_id,
                    "verdict": a.verdict.value,
                    "relations": a.relations,
                    "equal": a.equal,
                    "original_mean_count": a.original_means,
                    "replicated_mean_count": a.replicated_means,
                }
                for a in self.agents
            ],
        }


def proneness_certificate(
    profiles: Sequence[AgentProfile],
    policy_kind: PolicyKind,
    t_max: int,
    **policy_kwargs,
) -> PronenessReport:
    """Compare each agent's t-count law with and without one extra replica set.

    A replication-prone policy shows the replicated law dominating the original
    (strictly somewhere); a replication-proof hierarchical policy on
    single-original agents shows identical laws.
    """
    kind = PolicyKind(policy_kind)
    base = enumerate_exact(build_instance(profiles), kind, t_max, **policy_kwargs)
    certificates = []
    for profile in sorted(profiles, key=lambda p: p.agent_id):
        agent_id = profile.agent_id
        replicated = enumerate_exact(build_instance(duplicate_agent(profiles, agent_id)), kind, t_max, **policy_kwargs)
        relations, equal, orig_means, rep_means = [], [], [], []
        for t in range(1, t_max + 1):
            original_law = base.at(t, agent_id)
            replicated_law = replicated.at(t, agent_id)
            relations.append(dominance_check(replicated_law, original_law).value)
            equal.append(replicated_law.equals(original_law))
            orig_means.append(original_law.mean())
            rep_means.append(replicated_law.mean())
        certificates.append(AgentCertificate(agent_id, relations, equal, orig_means, rep_means))
        logger.info(f"{kind.value}: agent {agent_id} replication relations {relations}")
    return PronenessReport(policy=kind.value, t_max=t_max, agents=certificates)


def multinomial_tolerance(p: float, reps: int, sigmas: float = 3.0) -> float:
    return sigmas * math.sqrt(max(p * (1.0 - p), 1e-12) / reps)
