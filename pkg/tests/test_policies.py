import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategic_bandits.errors import StaleUpdate
from strategic_bandits.models.instance import AgentProfile, build_instance, draw_reward
from strategic_bandits.models.policies import (
    AgentStats,
    PolicyKind,
    PolicyRandom,
    fair_select,
    hucb_agent_index,
    init_state,
    policy_update,
    prhucb_agent_index,
    rhucb_agent_index,
    rhucb_init,
    select,
    subsample_size,
    sucb_init,
    ucb1_select,
    ucb_index,
)

from tests.helpers import FixedStream, single_arm_profiles


def play(kind, instance, T, seed=0, reward_seed=1, **hyper):
    """Run T rounds; returns (state, arms, rewards)."""
    horizon = hyper.pop("horizon", T)
    state = init_state(kind, instance, horizon=horizon, **hyper)
    rng = PolicyRandom.from_seed(seed)
    rewards_rng = np.random.default_rng(reward_seed)
    arms, rewards = [], []
    for _ in range(T):
        arm = select(state, instance, rng)
        reward = draw_reward(instance.arms[arm], rewards_rng)
        policy_update(state, arm, reward)
        arms.append(arm)
        rewards.append(reward)
    return state, arms, rewards


class TestIndices:
    def test_ucb_index_hand_value(self):
        assert ucb_index(0.0, 1, math.e**2) == pytest.approx(2.0, abs=1e-12)

    def test_hucb_agent_index(self):
        assert hucb_agent_index(AgentStats(N=4, R=0.5), 100) == pytest.approx(2.01743, abs=1e-5)
        assert hucb_agent_index(AgentStats(N=7, R=0.3), 1) == 0.3

    def test_rhucb_agent_index(self):
        assert rhucb_agent_index(AgentStats(N=4, R=0.5), 100) == pytest.approx(3.89307, abs=1e-5)

    def test_prhucb_agent_index(self):
        expected = 0.5 + math.sqrt(math.sqrt(100 * math.log(100) ** 3) / 4)
        assert prhucb_agent_index(AgentStats(N=4, R=0.5), 100) == pytest.approx(expected, abs=1e-12)

    def test_bonus_shrinks_with_pulls(self):
        values = [hucb_agent_index(AgentStats(N=N, R=0.4), 1000) for N in (1, 10, 100, 10_000)]
        assert values == sorted(values, reverse=True)
        assert values[-1] - 0.4 < 0.05

    @given(
        N=st.integers(1, 10**6),
        R=st.floats(0.0, 1.0),
        t=st.integers(1, 10**7),
    )
    def test_indices_grow_with_the_round(self, N, R, t):
        stats = AgentStats(N=N, R=R)
        for index in (hucb_agent_index, rhucb_agent_index, prhucb_agent_index):
            assert index(stats, t + 1) >= index(stats, t)
        assert ucb_index(R, N, t + 1) >= ucb_index(R, N, t)


class TestUCB1:
    def test_unexplored_arms_are_uniform(self):
        instance = build_instance([AgentProfile.from_means(1, [0.5, 0.6, 0.7], [1, 1, 1])])
        picks = set()
        for k in range(3):
            state = init_state("ucb1", instance)
            picks.add(ucb1_select(state, instance, PolicyRandom(agent=FixedStream(), arm=FixedStream(k))))
        assert picks == {0, 1, 2}

    def test_ties_are_uniform(self):
        instance = build_instance(single_arm_profiles([0.5, 0.5]))
        state = init_state("ucb1", instance)
        for _ in range(2):
            select(state, instance, PolicyRandom.from_seed(0))
            policy_update(state, state.pending, 1)
        stream = FixedStream(1)
        assert ucb1_select(state, instance, PolicyRandom(agent=FixedStream(), arm=stream)) == 1
        assert stream.calls == [2]

    def test_first_tie_break_is_deterministic(self):
        instance = build_instance(single_arm_profiles([0.5, 0.5, 0.5]))
        state = init_state("ucb1", instance, tie_break="first")
        stream = FixedStream(2)
        assert ucb1_select(state, instance, PolicyRandom(agent=stream, arm=stream)) == 0
        assert stream.calls == []


class TestFair:
    def test_agent_draw_ignores_arm_counts(self):
        instance = build_instance(
            [AgentProfile.from_means(1, [0.5], [50]), AgentProfile.from_means(2, [0.5], [1])]
        )
        state = init_state("fair", instance)
        arm = fair_select(state, instance, PolicyRandom(agent=FixedStream(1), arm=FixedStream(0)))
        assert instance.agent_of(arm) == 2

    @pytest.mark.slow
    def test_agent_frequencies(self):
        instance = build_instance(single_arm_profiles([0.5, 0.6, 0.7, 0.8, 0.9]))
        _, arms, _ = play("fair", instance, 100_000)
        freq = np.bincount(arms, minlength=5) / len(arms)
        np.testing.assert_allclose(freq, 0.2, atol=0.004)

    def test_global_clock(self):
        instance = build_instance(single_arm_profiles([0.2, 0.9]))
        state, _, _ = play("fair", instance, 50, fair_clock="global")
        assert state.t == 50


class TestSubsampling:
    def test_sucb_clamps_to_population(self):
        instance = build_instance(single_arm_profiles([0.1, 0.2, 0.3, 0.4, 0.5]))
        assert sucb_init(instance, l=10 / math.log(100), T=100, rng=np.random.default_rng(0)) == [0, 1, 2, 3, 4]

    def test_sucb_size(self):
        instance = build_instance(
            [AgentProfile.from_means(1, [0.5], [1001])]
        )
        assert subsample_size(15, 10**4, 5005) == 139
        sample = sucb_init(instance, l=0.5, T=10**4, rng=np.random.default_rng(3))
        assert len(sample) == len(set(sample)) == math.ceil(0.5 * math.log(10**4))

    def test_rhucb_subsample_size(self):
        assert subsample_size(3, math.floor(math.exp(10)), 2000) == 30

    def test_rhucb_small_agents_keep_everything(self):
        instance = build_instance(
            [AgentProfile.from_means(1, [0.5], [3]), AgentProfile.from_means(2, [0.9, 0.1], [40, 40])]
        )
        subsample = rhucb_init(instance, L=2, T=100, rng=np.random.default_rng(0))
        assert subsample[0] == [0, 1, 2]
        assert len(subsample[1]) == 10
        assert set(subsample[1]) <= set(instance.arms_of(2).tolist())

    def test_rhucb_never_leaves_subsample(self):
        instance = build_instance(
            [AgentProfile.from_means(1, [0.7, 0.3], [30, 30]), AgentProfile.from_means(2, [0.6], [25])]
        )
        state, arms, _ = play("rhucb", instance, 400, L=1.0)
        allowed = set(state.subsample_of(1)) | set(state.subsample_of(2))
        assert set(arms) <= allowed
        assert len(state.subsample_of(1)) == math.ceil(math.log(400))

    @pytest.mark.slow
    def test_subsample_miss_frequency(self):
        # c = 0.5, L = 2, T = 100: a per-agent subsample misses every best copy with probability <= 1/T
        instance = build_instance([AgentProfile.from_means(1, [0.9, 0.1], [10, 10])])
        best = set(int(a) for a in instance.arms_of(1) if instance.means[a] == 0.9)
        rng = np.random.default_rng(8)
        trials = 100_000
        misses = sum(not best & set(rhucb_init(instance, L=2, T=100, rng=rng)[0]) for _ in range(trials))
        margin = 3 * math.sqrt(0.01 * 0.99 / trials)
        assert misses / trials <= 0.01 + margin

    def test_prhucb_single_arm_agent(self):
        instance = build_instance(single_arm_profiles([0.4, 0.6]))
        state, _, _ = play("prhucb", instance, 30)
        assert state.subsample_of(1) == [0]
        assert state.subsample_of(2) == [1]

    def test_prhucb_first_selection_admits_one_arm(self):
        instance = build_instance([AgentProfile.from_means(1, [0.5], [20]), AgentProfile.from_means(2, [0.5], [20])])
        state, _, _ = play("prhucb", instance, 2)
        assert len(state.subsample_of(1)) == 1
        assert len(state.subsample_of(2)) == 1

    @pytest.mark.slow
    @settings(max_examples=1000, deadline=None)
    @given(
        copies=st.lists(st.integers(1, 40), min_size=1, max_size=4),
        T=st.integers(1, 150),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_prhucb_growth_bound(self, copies, T, seed):
        instance = build_instance(
            [AgentProfile.from_means(i, [0.3 + 0.1 * i], [c]) for i, c in enumerate(copies, start=1)]
        )
        state = init_state("prhucb", instance, horizon=T)
        rng = PolicyRandom.from_seed(seed)
        rewards = np.random.default_rng(seed + 1)
        sizes = {a: 0 for a in instance.agent_ids}
        for t in range(1, T + 1):
            arm = select(state, instance, rng)
            policy_update(state, arm, draw_reward(instance.arms[arm], rewards))
            limit = math.log(t) ** 2 if t > 1 else 0.0
            for agent_id in instance.agent_ids:
                size = len(state.subsample_of(agent_id))
                assert size >= sizes[agent_id]
                assert size <= max(1, min(len(instance.arms_of(agent_id)), math.ceil(limit)))
                sizes[agent_id] = size


class TestHierarchical:
    def test_first_rounds_visit_every_agent(self):
        instance = build_instance(
            [AgentProfile.from_means(1, [0.5], [5]), AgentProfile.from_means(2, [0.7], [1]), AgentProfile.from_means(3, [0.2], [2])]
        )
        for kind in ("hucb", "rhucb", "prhucb"):
            state, _, _ = play(kind, instance, 3)
            assert state.agent_N.tolist() == [1, 1, 1]

    def test_first_agent_pick_is_uniform(self):
        instance = build_instance(single_arm_profiles([0.5, 0.6, 0.7]))
        picks = set()
        for k in range(3):
            state = init_state("hucb", instance)
            arm = select(state, instance, PolicyRandom(agent=FixedStream(k), arm=FixedStream(0)))
            picks.add(instance.agent_of(arm))
        assert picks == {1, 2, 3}

    @pytest.mark.parametrize("kind", ["hucb", "rhucb", "prhucb", "fair"])
    @pytest.mark.parametrize("k", [2, 10])
    def test_agent_sequence_is_arm_blind(self, kind, k):
        base = build_instance(single_arm_profiles([0.5, 0.7, 0.6]))
        replicated = build_instance(single_arm_profiles([0.5, 0.7, 0.6], copies=[k, 1, 1]))
        _, arms_a, _ = play(kind, base, 300, seed=5, reward_seed=9)
        _, arms_b, _ = play(kind, replicated, 300, seed=5, reward_seed=9)
        agents_a = [base.agent_of(a) for a in arms_a]
        agents_b = [replicated.agent_of(a) for a in arms_b]
        assert agents_a == agents_b

    def test_ucb1_is_not_arm_blind(self):
        base = build_instance(single_arm_profiles([0.5, 0.7]))
        replicated = build_instance(single_arm_profiles([0.5, 0.7], copies=[20, 1]))
        _, arms_a, _ = play("ucb1", base, 100, seed=5, reward_seed=9)
        _, arms_b, _ = play("ucb1", replicated, 100, seed=5, reward_seed=9)
        count_a = sum(base.agent_of(a) == 1 for a in arms_a)
        count_b = sum(replicated.agent_of(a) == 1 for a in arms_b)
        assert count_b > count_a


class TestUpdate:
    def test_first_reward(self):
        instance = build_instance(single_arm_profiles([0.5]))
        state = init_state("ucb1", instance)
        select(state, instance, PolicyRandom.from_seed(0))
        policy_update(state, 0, 1)
        assert state.arm_stats(0).n == 1
        assert state.arm_stats(0).r == 1.0
        assert state.agent_stats(1).R == 1.0

    def test_running_mean(self):
        instance = build_instance(single_arm_profiles([0.5]))
        state = init_state("ucb1", instance)
        for reward in (1, 0, 1):
            select(state, instance, PolicyRandom.from_seed(0))
            policy_update(state, 0, reward)
        assert state.arm_stats(0).n == 3
        assert state.arm_stats(0).r == pytest.approx(2 / 3, abs=1e-12)

    def test_update_without_select(self):
        instance = build_instance(single_arm_profiles([0.5, 0.6]))
        state = init_state("hucb", instance)
        with pytest.raises(StaleUpdate):
            policy_update(state, 0, 1)

    def test_update_wrong_arm(self):
        instance = build_instance(single_arm_profiles([0.5, 0.6]))
        state = init_state("ucb1", instance, tie_break="first")
        select(state, instance, PolicyRandom.from_seed(0))
        with pytest.raises(StaleUpdate):
            policy_update(state, 1, 1)

    def test_double_select(self):
        instance = build_instance(single_arm_profiles([0.5, 0.6]))
        state = init_state("ucb1", instance)
        select(state, instance, PolicyRandom.from_seed(0))
        with pytest.raises(StaleUpdate):
            select(state, instance, PolicyRandom.from_seed(0))


class TestInvariants:
    @pytest.mark.slow
    @settings(max_examples=1000, deadline=None)
    @given(
        kind=st.sampled_from([k.value for k in PolicyKind]),
        means=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=4),
        copies=st.lists(st.integers(1, 6), min_size=4, max_size=4),
        T=st.integers(1, 80),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_counts_and_means(self, kind, means, copies, T, seed):
        instance = build_instance(single_arm_profiles(means, copies[: len(means)]))
        state, arms, rewards = play(kind, instance, T, seed=seed, reward_seed=seed + 1, L=1.5, l=2.0)
        assert state.t == T
        assert int(state.arm_n.sum()) == int(state.agent_N.sum()) == T
        arms = np.asarray(arms)
        rewards = np.asarray(rewards, dtype=float)
        for arm in np.unique(arms):
            assert state.arm_r[arm] == pytest.approx(rewards[arms == arm].mean(), abs=1e-12)
        agents = instance.arm_agent[arms]
        for agent in np.unique(agents):
            assert state.agent_R[agent] == pytest.approx(rewards[agents == agent].mean(), abs=1e-12)

    @pytest.mark.parametrize("kind", [k.value for k in PolicyKind])
    def test_same_seed_same_run(self, kind):
        instance = build_instance(
            [AgentProfile.from_means(1, [0.6, 0.2], [4, 4]), AgentProfile.from_means(2, [0.5], [3])]
        )
        _, a, ra = play(kind, instance, 200, seed=3, reward_seed=4)
        _, b, rb = play(kind, instance, 200, seed=3, reward_seed=4)
        assert a == b and ra == rb
