import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rewarddesign.environments import RN_ORIGINAL, chain
from rewarddesign.learning import (Z_99, AggregateCurve, QLearningConfig, aggregate_runs,
                                   dominates, q_learning_run)
from rewarddesign.mdp import state_rewards

GAMMA = 0.95


def reference_q_learning(mdp, r, pi, gamma, cfg, uniforms):
    """Plain-Python transcription of the update rule, used as an oracle."""
    rew = state_rewards(mdp, r)
    q = np.full((mdp.n_states, mdp.n_actions), cfg.q_init)
    s, flags, episodes = mdp.start_state, [], 0
    for u_explore, u_action, u_next in uniforms:
        greedy = int(np.argmax(q[s]))
        flags.append(greedy == pi[s])
        a = min(int(u_action * mdp.n_actions), mdp.n_actions - 1) if u_explore < cfg.epsilon else greedy
        nxt = int(np.searchsorted(np.cumsum(mdp.transition[s, a]), u_next, side="right"))
        nxt = min(nxt, mdp.n_states - 1)
        target = rew[nxt] if mdp.terminal[nxt] else rew[nxt] + gamma * q[nxt].max()
        q[s, a] += cfg.learning_rate * (target - q[s, a])
        if mdp.terminal[nxt]:
            episodes += 1
            s = mdp.start_state
        else:
            s = nxt
    return np.array(flags, bool), q, episodes


def test_zero_steps(chain60):
    tr = q_learning_run(*chain60[:1], (1, -1), chain60[1], GAMMA, QLearningConfig(steps=0))
    assert len(tr.cumulative_correct) == 0 and tr.total_correct == 0
    assert tr.episodes_completed == 0


def test_hand_simulated_two_state_chain():
    # s0 -> goal with combo reward (goal +1, step -1), greedy, step size 1
    mdp, pi = chain(2)
    cfg = QLearningConfig(steps=10, learning_rate=1.0, epsilon=0.0)
    tr = q_learning_run(mdp, (1, -1), pi, GAMMA, cfg)
    # t=0: tie picks left, self-loop with reward -1 -> Q(s0, left) = -1
    # t=1: right is now greedy and reaches the goal -> Q(s0, right) = 1, episode ends
    np.testing.assert_array_equal(tr.correct_flags, [False] + [True] * 9)
    np.testing.assert_array_equal(tr.cumulative_correct, np.arange(10))
    np.testing.assert_array_equal(tr.final_q, [[-1.0, 1.0], [0.0, 0.0]])
    assert tr.episodes_completed == 9


@pytest.mark.parametrize("eps, alpha", [(0.1, 0.5), (0.3, 0.1), (1.0, 1.0)])
def test_kernel_matches_reference(grid, eps, alpha):
    mdp, pi = grid
    cfg = QLearningConfig(steps=3000, learning_rate=alpha, epsilon=eps, seed=11)
    tr = q_learning_run(mdp, RN_ORIGINAL, pi, GAMMA, cfg)
    uniforms = np.random.Generator(np.random.Philox(11)).random((3000, 3))
    flags, q, episodes = reference_q_learning(mdp, RN_ORIGINAL, pi, GAMMA, cfg, uniforms)
    np.testing.assert_array_equal(tr.correct_flags, flags)
    np.testing.assert_allclose(tr.final_q, q, atol=1e-12)
    assert tr.episodes_completed == episodes


def test_uniform_stream_is_prefix_stable():
    # a shorter run consumes a prefix of the longer run's random stream
    a = np.random.Generator(np.random.Philox(5)).random((100, 3))
    b = np.random.Generator(np.random.Philox(5)).random((40, 3))
    np.testing.assert_array_equal(a[:40], b)


def test_prefix_consistency(grid):
    mdp, pi = grid
    long = q_learning_run(mdp, RN_ORIGINAL, pi, GAMMA, QLearningConfig(steps=2000, seed=3))
    short = q_learning_run(mdp, RN_ORIGINAL, pi, GAMMA, QLearningConfig(steps=700, seed=3))
    np.testing.assert_array_equal(long.cumulative_correct[:700], short.cumulative_correct)


def test_determinism(grid):
    mdp, pi = grid
    cfg = QLearningConfig(steps=5000, seed=42)
    a = aggregate_runs(mdp, RN_ORIGINAL, pi, GAMMA, cfg, 8)
    b = aggregate_runs(mdp, RN_ORIGINAL, pi, GAMMA, cfg, 8, workers=4)
    np.testing.assert_array_equal(a.mean, b.mean)
    np.testing.assert_array_equal(a.half_width, b.half_width)
    c = aggregate_runs(mdp, RN_ORIGINAL, pi, GAMMA, QLearningConfig(steps=5000, seed=43), 8)
    assert not np.array_equal(a.mean, c.mean)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), eps=st.floats(0, 1), alpha=st.floats(0.01, 1))
def test_cumulative_bounds(grid, seed, eps, alpha):
    mdp, pi = grid
    cfg = QLearningConfig(steps=500, learning_rate=alpha, epsilon=eps, seed=seed)
    tr = q_learning_run(mdp, RN_ORIGINAL, pi, GAMMA, cfg)
    c = tr.cumulative_correct
    assert np.all(np.diff(c) >= 0) and np.all(np.diff(c) <= 1)
    assert 0 <= c[-1] <= 500
    # zero-initialized Q stays within the discounted reward range
    bound = np.abs(state_rewards(mdp, RN_ORIGINAL)).max() / (1 - GAMMA)
    assert np.all(np.abs(tr.final_q) <= bound + 1e-9)


def test_goal_only_reward_no_argmax_change_before_goal():
    mdp, pi = chain(5)
    cfg = QLearningConfig(steps=400, epsilon=0.8, seed=1)
    tr = q_learning_run(mdp, (1, 0), pi, GAMMA, cfg)
    assert tr.episodes_completed >= 1
    for t in range(1, 400):
        short = q_learning_run(mdp, (1, 0), pi, GAMMA, QLearningConfig(steps=t, epsilon=0.8, seed=1))
        if short.episodes_completed:
            break
        # every reward seen so far is zero, so Q and the greedy action never move
        assert not short.final_q.any()
        assert not short.correct_flags.any()


def test_greedy_goal_only_never_moves():
    mdp, pi = chain(8)
    tr = q_learning_run(mdp, (1, 0), pi, GAMMA, QLearningConfig(steps=200, epsilon=0.0))
    assert tr.episodes_completed == 0 and tr.total_correct == 0


def test_single_run_interval_is_zero(grid):
    curve = aggregate_runs(*grid[:1], RN_ORIGINAL, grid[1], GAMMA, QLearningConfig(steps=100), 1)
    assert np.all(curve.half_width == 0)
    assert curve.final_interval[0] == curve.final_interval[1] == curve.final_mean


def test_interval_formula(grid):
    mdp, pi = grid
    cfg = QLearningConfig(steps=300, seed=9)
    curve = aggregate_runs(mdp, RN_ORIGINAL, pi, GAMMA, cfg, 6)
    finals = [q_learning_run(mdp, RN_ORIGINAL, pi, GAMMA,
                             QLearningConfig(steps=300, seed=9 + k)).total_correct for k in range(6)]
    np.testing.assert_array_equal(curve.finals, finals)
    assert curve.final_mean == pytest.approx(np.mean(finals))
    assert curve.half_width[-1] == pytest.approx(Z_99 * np.std(finals, ddof=1) / np.sqrt(6))


def test_dominates():
    def curve(m, h):
        return AggregateCurve(np.array([m]), np.array([h]), 10, np.array([m]))
    assert dominates(curve(10, 1), curve(7, 1))
    assert not dominates(curve(10, 2), curve(7, 2))
    assert not dominates(curve(7, 1), curve(10, 1))


def test_config_validation():
    with pytest.raises(ValueError):
        QLearningConfig(learning_rate=0)
    with pytest.raises(ValueError):
        QLearningConfig(epsilon=1.5)
    with pytest.raises(ValueError):
        QLearningConfig(steps=-1)
