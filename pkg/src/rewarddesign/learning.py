"""Tabular Q-learning scored by cumulative correct actions.

At every step the agent first records whether its greedy action (lowest index
on ties) at the current state equals the target action, then acts
epsilon-greedily. The reward of a transition is the reward of the state
entered. Entering a terminal state ends the episode; the next step starts
from the start state.

Randomness: run ``k`` of a batch uses ``numpy.random.Philox(base_seed + k)``
and draws three uniforms per step in the fixed order (explore coin, random
action, successor), whether or not each one is used.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .mdp import Mdp, PolicyLike, RewardLike, as_policy, state_rewards

Z_99 = 2.5758293035489004


@dataclass(frozen=True)
class QLearningConfig:
    steps: int = 10_000
    learning_rate: float = 0.5
    epsilon: float = 0.1
    q_init: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must lie in (0, 1]")
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")


@dataclass(frozen=True, eq=False)
class RunTrace:
    correct_flags: np.ndarray
    cumulative_correct: np.ndarray
    final_q: np.ndarray
    episodes_completed: int

    @property
    def total_correct(self) -> int:
        return int(self.cumulative_correct[-1]) if len(self.cumulative_correct) else 0


@dataclass(frozen=True, eq=False)
class AggregateCurve:
    mean: np.ndarray
    half_width: np.ndarray
    n_runs: int
    finals: np.ndarray

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1]) if len(self.mean) else 0.0

    @property
    def final_interval(self) -> tuple[float, float]:
        if not len(self.mean):
            return 0.0, 0.0
        return float(self.mean[-1] - self.half_width[-1]), float(self.mean[-1] + self.half_width[-1])

    def rows(self):
        return [(t + 1, float(m), float(h)) for t, (m, h) in enumerate(zip(self.mean, self.half_width))]


CURVE_COLUMNS = ("step", "mean_cumulative_correct", "ci_half_width")


@numba.njit(cache=True, nogil=True)
def _argmax(row):
    best = 0
    for a in range(1, row.shape[0]):
        if row[a] > row[best]:
            best = a
    return best


@numba.njit(cache=True, nogil=True)
def _q_learning_kernel(cum_t, terminal, start, rewards, target, gamma, alpha, epsilon,
                       q, uniforms, flags):
    n_actions = q.shape[1]
    n_states = q.shape[0]
    s = start
    episodes = 0
    for t in range(uniforms.shape[0]):
        greedy = _argmax(q[s])
        flags[t] = greedy == target[s]
        if uniforms[t, 0] < epsilon:
            a = min(int(uniforms[t, 1] * n_actions), n_actions - 1)
        else:
            a = greedy
        u = uniforms[t, 2]
        nxt = n_states - 1
        for sp in range(n_states):
            if u < cum_t[s, a, sp]:
                nxt = sp
                break
        r = rewards[nxt]
        if terminal[nxt]:
            td_target = r
        else:
            td_target = r + gamma * q[nxt, _argmax(q[nxt])]
        q[s, a] += alpha * (td_target - q[s, a])
        if terminal[nxt]:
            episodes += 1
            s = start
        else:
            s = nxt
    return episodes


def _prepare(mdp: Mdp, r: RewardLike, pi_plus):
    cum_t = np.cumsum(mdp.transition, axis=2)
    # guard against round-off leaving the last cumulative entry just under 1
    cum_t[..., -1] = np.maximum(cum_t[..., -1], 1.0 + 1e-12)
    return (np.ascontiguousarray(cum_t), np.ascontiguousarray(mdp.terminal),
            np.ascontiguousarray(state_rewards(mdp, r)),
            np.ascontiguousarray(as_policy(pi_plus).actions))


def _run(prepared, mdp: Mdp, gamma: float, cfg: QLearningConfig, seed: int) -> RunTrace:
    cum_t, terminal, rewards, target = prepared
    rng = np.random.Generator(np.random.Philox(seed))
    uniforms = rng.random((cfg.steps, 3))
    q = np.full((mdp.n_states, mdp.n_actions), float(cfg.q_init))
    flags = np.zeros(cfg.steps, dtype=np.bool_)
    episodes = _q_learning_kernel(cum_t, terminal, mdp.start_state, rewards, target,
                                  float(gamma), float(cfg.learning_rate), float(cfg.epsilon),
                                  q, uniforms, flags)
    return RunTrace(flags, np.cumsum(flags, dtype=np.int64), q, int(episodes))


def q_learning_run(mdp: Mdp, r: RewardLike, pi_plus: PolicyLike, gamma: float,
                   cfg: QLearningConfig) -> RunTrace:
    return _run(_prepare(mdp, r, pi_plus), mdp, gamma, cfg, cfg.seed)


def aggregate_runs(mdp: Mdp, r: RewardLike, pi_plus: PolicyLike, gamma: float,
                   cfg: QLearningConfig, n_runs: int, workers: int = 1) -> AggregateCurve:
    """Mean cumulative-correct curve with a 99% normal-approximation interval."""
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    prepared = _prepare(mdp, r, pi_plus)

    def one(k):
        return _run(prepared, mdp, gamma, cfg, cfg.seed + k).cumulative_correct

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            curves = list(pool.map(one, range(n_runs)))
    else:
        curves = [one(k) for k in range(n_runs)]
    # rows stay in run-index order, so the reduction is schedule-independent
    stacked = np.stack(curves).astype(float).reshape(n_runs, cfg.steps)
    mean = stacked.mean(axis=0)
    if n_runs > 1:
        half = Z_99 * stacked.std(axis=0, ddof=1) / np.sqrt(n_runs)
    else:
        half = np.zeros(cfg.steps)
    finals = stacked[:, -1].astype(np.int64) if cfg.steps else np.zeros(n_runs, np.int64)
    return AggregateCurve(mean, half, n_runs, finals)


def dominates(a: AggregateCurve, b: AggregateCurve) -> bool:
    """``a`` beats ``b`` with non-overlapping 99% intervals at the final step."""
    return a.final_interval[0] > b.final_interval[1]
