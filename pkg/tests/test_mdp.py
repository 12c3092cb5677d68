import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rewarddesign.environments import RN_ORIGINAL, chain
from rewarddesign.mdp import (Mdp, Policy, RewardVector, action_gap, evaluate_policy, is_correct,
                              optimal_policy, policy_matrix, reward_of_state, state_rewards)

GAMMA = 0.95


def bellman_residual(mdp, r, pi, gamma, v):
    rew = state_rewards(mdp, r)
    return np.max(np.abs(v - rew - gamma * policy_matrix(mdp, pi) @ v))


# closed forms for the n-state chain, minimum attained at the leftmost state
def gap_goal(n, g):
    return g ** (n - 1) * (1 - g)


def gap_penalty(n, g):
    return g ** (n - 1)


def gap_combo(n, g):
    return g ** (n - 1) * (2 - g)


class TestRewardOfState:
    def test_grid_goal_state(self, grid):
        mdp, _ = grid
        goal = int(np.flatnonzero(mdp.features[:, 1])[0])
        assert reward_of_state(mdp, RN_ORIGINAL, goal) == 1.0

    def test_zero_weights(self, grid):
        mdp, _ = grid
        assert all(reward_of_state(mdp, [0, 0, 0], s) == 0 for s in range(mdp.n_states))

    def test_subgoal_state(self, subgoal_const):
        mdp, _ = subgoal_const
        assert reward_of_state(mdp, (-1, 1, -0.7), 2) == pytest.approx(-0.7)
        assert reward_of_state(mdp, (-1, 1, -0.7), 3) == -1.0

    def test_out_of_range(self, grid):
        with pytest.raises(IndexError):
            reward_of_state(grid[0], RN_ORIGINAL, 11)


class TestMdpValidation:
    def test_rejects_non_stochastic_row(self):
        t = np.zeros((2, 1, 2))
        t[0, 0, 1] = 0.9
        t[1, 0, 1] = 1.0
        with pytest.raises(ValueError, match=r"s=0, a=0"):
            Mdp(t, [False, True], 0, np.eye(2), 0.9)

    def test_rejects_discount_one(self):
        mdp, _ = chain(3)
        with pytest.raises(ValueError):
            Mdp(mdp.transition, mdp.terminal, 0, mdp.features, 1.0)

    def test_immutable(self, chain60):
        mdp, _ = chain60
        with pytest.raises(ValueError):
            mdp.transition[0, 0, 0] = 0.5

    def test_out_of_box_reward_warns(self):
        with pytest.warns(UserWarning):
            RewardVector([2.0])
        with pytest.raises(ValueError):
            RewardVector([2.0], strict=True)


class TestEvaluatePolicy:
    def test_zero_discount(self, grid):
        mdp, pi = grid
        vt = evaluate_policy(mdp, RN_ORIGINAL, pi, 0.0)
        np.testing.assert_array_equal(vt.v, state_rewards(mdp, RN_ORIGINAL))

    def test_chain_goal_value(self, chain60):
        mdp, pi = chain60
        vt = evaluate_policy(mdp, (1, 0), pi, GAMMA)
        assert vt.v[0] == pytest.approx(0.95 ** 59, abs=1e-12)
        assert vt.v[0] == pytest.approx(0.0485, abs=5e-5)

    def test_chain_goal_value_by_rollout(self, chain60):
        # deterministic chain: one rollout of the target policy is exact
        mdp, pi = chain60
        s, total, disc = 0, 0.0, 1.0
        rew = state_rewards(mdp, (1, 0))
        for _ in range(10_000):
            total += disc * rew[s]
            if mdp.terminal[s]:
                break
            s = int(np.argmax(mdp.transition[s, pi[s]]))
            disc *= GAMMA
        assert evaluate_policy(mdp, (1, 0), pi, GAMMA).v[0] == pytest.approx(total, abs=1e-12)

    def test_terminal_value_is_reward(self, grid):
        mdp, pi = grid
        vt = evaluate_policy(mdp, RN_ORIGINAL, pi, GAMMA)
        rew = state_rewards(mdp, RN_ORIGINAL)
        np.testing.assert_array_equal(vt.v[mdp.terminal], rew[mdp.terminal])

    def test_v_equals_q_of_policy(self, grid):
        mdp, pi = grid
        vt = evaluate_policy(mdp, RN_ORIGINAL, pi, GAMMA)
        nt = mdp.nonterminal
        np.testing.assert_allclose(vt.v[nt], vt.q[nt, pi.actions[nt]], atol=1e-9)

    def test_residual_on_suite(self, suite_envs):
        rng = np.random.default_rng(0)
        for mdp, pi in suite_envs.values():
            for gamma in (0.0, 0.5, 0.95, 0.999):
                w = rng.uniform(-1, 1, mdp.n_features)
                vt = evaluate_policy(mdp, w, pi, gamma)
                assert bellman_residual(mdp, w, pi, gamma, vt.v) < 1e-10

    def test_rejects_bad_discount(self, grid):
        with pytest.raises(ValueError):
            evaluate_policy(grid[0], RN_ORIGINAL, grid[1], 1.0)


class TestOptimalPolicy:
    def test_combo_goes_right(self, chain60):
        mdp, pi = chain60
        best, _ = optimal_policy(mdp, (1, -1), GAMMA)
        assert np.all(best.actions[mdp.nonterminal] == 1)

    def test_zero_reward_ties_to_action_zero(self, grid):
        best, _ = optimal_policy(grid[0], [0, 0, 0], GAMMA)
        assert np.all(best.actions == 0)

    def test_grid_matches_exhaustive_enumeration(self, grid):
        mdp, pi = grid
        nt = mdp.nonterminal
        rew = state_rewards(mdp, RN_ORIGINAL)
        best_v, best_pol = None, None
        for combo in itertools.product(range(4), repeat=len(nt)):
            acts = np.zeros(mdp.n_states, int)
            acts[nt] = combo
            v = np.linalg.solve(np.eye(mdp.n_states) - GAMMA * policy_matrix(mdp, Policy(acts)), rew)
            # the optimal policy maximizes every state at once, hence the sum
            if best_v is None or v.sum() > best_v.sum() + 1e-12:
                best_v, best_pol = v, acts
        np.testing.assert_array_equal(best_pol[nt], pi.actions[nt])
        _, vt = optimal_policy(mdp, RN_ORIGINAL, GAMMA)
        np.testing.assert_allclose(vt.v, best_v, atol=1e-9)

    def test_fixed_point(self, grid):
        mdp, pi = grid
        best, vt = optimal_policy(mdp, RN_ORIGINAL, GAMMA)
        exact = evaluate_policy(mdp, RN_ORIGINAL, best, GAMMA)
        np.testing.assert_allclose(vt.v, exact.v, atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(c=st.floats(0.01, 100.0), seed=st.integers(0, 2**16))
    def test_scale_invariance(self, c, seed):
        mdp, _ = chain(8, "dense")
        w = np.random.default_rng(seed).uniform(-1, 1, 8)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            scaled = RewardVector(w * c)
        p1, v1 = optimal_policy(mdp, w, GAMMA)
        p2, _ = optimal_policy(mdp, scaled, GAMMA)
        # skip draws with near-ties where the argmax is numerically fragile
        gaps = np.sort(v1.q, axis=1)
        if np.min(gaps[:, -1] - gaps[:, -2]) > 1e-9:
            assert p1 == p2


class TestActionGap:
    @pytest.mark.parametrize("reward, expected", [((1, 0), 0.0024), ((0, -1), 0.0485),
                                               ((1, -1), 0.0509)])
    def test_reference_chain_gaps(self, chain60, reward, expected):
        mdp, pi = chain60
        assert action_gap(mdp, reward, pi, GAMMA) == pytest.approx(expected, abs=5e-5)

    @pytest.mark.parametrize("n", [3, 10, 60])
    @pytest.mark.parametrize("g", [0.5, 0.9, 0.95])
    def test_closed_forms(self, n, g):
        mdp, pi = chain(n)
        assert abs(action_gap(mdp, (1, 0), pi, g) - gap_goal(n, g)) < 1e-9
        assert abs(action_gap(mdp, (0, -1), pi, g) - gap_penalty(n, g)) < 1e-9
        assert abs(action_gap(mdp, (1, -1), pi, g) - gap_combo(n, g)) < 1e-9

    def test_single_action_rejected(self):
        t = np.zeros((2, 1, 2))
        t[:, 0, 1] = 1.0
        mdp = Mdp(t, [False, True], 0, np.eye(2), 0.9)
        with pytest.raises(ValueError):
            action_gap(mdp, [0, 1], Policy([0, 0]), 0.9)


class TestIsCorrect:
    def test_grid_original(self, grid):
        assert is_correct(grid[0], RN_ORIGINAL, grid[1], GAMMA)

    def test_zero_reward(self, grid):
        assert not is_correct(grid[0], [0, 0, 0], grid[1], GAMMA)

    def test_goal_penalized(self, chain60):
        mdp, pi = chain60
        assert not is_correct(mdp, (-1, 0), pi, GAMMA)
        best, _ = optimal_policy(mdp, (-1, 0), GAMMA)
        assert best != pi

    def test_correct_means_optimal(self, suite_envs):
        rng = np.random.default_rng(3)
        for mdp, pi in suite_envs.values():
            for _ in range(200):
                w = rng.uniform(-1, 1, mdp.n_features)
                if is_correct(mdp, w, pi, GAMMA):
                    best, _ = optimal_policy(mdp, w, GAMMA)
                    nt = mdp.nonterminal
                    np.testing.assert_array_equal(best.actions[nt], pi.actions[nt])
