"""Finite MDPs with linear state-based rewards.

Rewards accrue on the state occupied: ``V(s) = R(s) + gamma * E[V(s')]``.
Terminal states are absorbing; they pay their own reward once and have no
continuation, so every action at a terminal has the same value.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

STOCHASTIC_TOL = 1e-12
VI_TOL = 1e-12
VI_MAX_SWEEPS = 100_000


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_discount(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"discount must lie in [0, 1), got {gamma}")
    return gamma


@dataclass(frozen=True, eq=False)
class Mdp:
    """Tabular MDP with a feature matrix and an objective discount.

    ``transition`` has shape (S, A, S). Rows of terminal states are ignored by
    every computation in this package but must still be non-negative.
    """

    transition: np.ndarray
    terminal: np.ndarray
    start_state: int
    features: np.ndarray
    objective_discount: float
    feature_names: tuple = ()

    def __post_init__(self):
        t = _frozen(self.transition, float)
        term = _frozen(self.terminal, bool)
        f = _frozen(self.features, float)
        if t.ndim != 3 or t.shape[0] != t.shape[2]:
            raise ValueError(f"transition must have shape (S, A, S), got {t.shape}")
        n_states = t.shape[0]
        if term.shape != (n_states,):
            raise ValueError("terminal mask length must equal n_states")
        if f.ndim != 2 or f.shape[0] != n_states:
            raise ValueError(f"features must have shape (S, k), got {f.shape}")
        if (t < 0).any():
            raise ValueError("transition probabilities must be non-negative")
        sums = t[~term].sum(axis=2)
        bad = np.argwhere(np.abs(sums - 1.0) > STOCHASTIC_TOL)
        if bad.size:
            s, a = np.flatnonzero(~term)[bad[0, 0]], bad[0, 1]
            raise ValueError(
                f"transition row (s={s}, a={a}) sums to {sums[tuple(bad[0])]!r}, not 1")
        if not 0 <= int(self.start_state) < n_states:
            raise ValueError(f"start_state {self.start_state} out of range")
        names = tuple(self.feature_names) or tuple(f"f{i}" for i in range(f.shape[1]))
        if len(names) != f.shape[1]:
            raise ValueError("feature_names length must equal n_features")
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "terminal", term)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "start_state", int(self.start_state))
        object.__setattr__(self, "objective_discount", _check_discount(self.objective_discount))
        object.__setattr__(self, "feature_names", names)

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transition.shape[1]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def nonterminal(self) -> np.ndarray:
        return np.flatnonzero(~self.terminal)

    def continuation(self) -> np.ndarray:
        """Transition tensor with terminal rows zeroed (no continuation)."""
        t = self.transition.copy()
        t[self.terminal] = 0.0
        return t

    def with_features(self, features, feature_names: Sequence[str] = ()) -> "Mdp":
        return Mdp(self.transition, self.terminal, self.start_state, features,
                   self.objective_discount, tuple(feature_names))

    def with_state_features(self) -> "Mdp":
        """Same dynamics with one indicator feature per state."""
        return self.with_features(np.eye(self.n_states),
                                  [f"s{s}" for s in range(self.n_states)])

    def same_as(self, other: "Mdp", atol: float = 0.0) -> bool:
        return (self.transition.shape == other.transition.shape
                and self.features.shape == other.features.shape
                and np.allclose(self.transition, other.transition, rtol=0, atol=atol)
                and np.array_equal(self.terminal, other.terminal)
                and np.allclose(self.features, other.features, rtol=0, atol=atol)
                and self.start_state == other.start_state
                and abs(self.objective_discount - other.objective_discount) <= atol)


@dataclass(frozen=True, eq=False)
class RewardVector:
    """Per-feature reward weights. Synthesized rewards pass ``strict=True``."""

    weights: np.ndarray
    strict: bool = False

    def __post_init__(self):
        w = _frozen(np.atleast_1d(self.weights), float)
        if w.ndim != 1:
            raise ValueError("reward weights must be a vector")
        if np.any(np.abs(w) > 1.0 + 1e-9):
            msg = f"reward weights outside [-1, 1]: {w}"
            if self.strict:
                raise ValueError(msg)
            warnings.warn(msg, stacklevel=3)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.weights)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)

    def scaled(self, c: float) -> "RewardVector":
        return RewardVector(self.weights * c)


@dataclass(frozen=True, eq=False)
class Policy:
    """Deterministic policy: one action index per state."""

    actions: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "actions", _frozen(self.actions, np.int64))

    def __len__(self):
        return len(self.actions)

    def __getitem__(self, s):
        return self.actions[s]

    def __eq__(self, other):
        if not isinstance(other, Policy):
            return NotImplemented
        return np.array_equal(self.actions, other.actions)

    def __hash__(self):
        return hash(self.actions.tobytes())


@dataclass(frozen=True, eq=False)
class ValueTables:
    v: np.ndarray
    q: np.ndarray


RewardLike = Union[RewardVector, Sequence[float], np.ndarray]
PolicyLike = Union[Policy, Sequence[int], np.ndarray]


def as_reward(r: RewardLike) -> RewardVector:
    return r if isinstance(r, RewardVector) else RewardVector(r)


def as_policy(pi: PolicyLike) -> Policy:
    return pi if isinstance(pi, Policy) else Policy(pi)


def _check_policy(mdp: Mdp, pi: Policy) -> None:
    if len(pi) != mdp.n_states:
        raise ValueError(f"policy has {len(pi)} entries for {mdp.n_states} states")
    acts = pi.actions[mdp.nonterminal]
    if acts.size and (acts.min() < 0 or acts.max() >= mdp.n_actions):
        raise ValueError("policy action index out of range")


def state_rewards(mdp: Mdp, r: RewardLike) -> np.ndarray:
    w = as_reward(r).weights
    if len(w) != mdp.n_features:
        raise ValueError(f"reward has {len(w)} weights for {mdp.n_features} features")
    return mdp.features @ w


def reward_of_state(mdp: Mdp, r: RewardLike, s: int) -> float:
    if not 0 <= s < mdp.n_states:
        raise IndexError(f"state {s} out of range")
    return float(state_rewards(mdp, r)[s])


def policy_matrix(mdp: Mdp, pi: Policy) -> np.ndarray:
    """``T(s, pi(s), .)`` with terminal rows zeroed."""
    p = mdp.transition[np.arange(mdp.n_states), np.where(mdp.terminal, 0, pi.actions)]
    p = p.copy()
    p[mdp.terminal] = 0.0
    return p


def q_from_v(mdp: Mdp, rewards: np.ndarray, v: np.ndarray, gamma: float) -> np.ndarray:
    q = rewards[:, None] + gamma * (mdp.continuation() @ v)
    return q


def evaluate_policy(mdp: Mdp, r: RewardLike, pi: PolicyLike, gamma: float) -> ValueTables:
    """Exact ``V^pi`` and ``Q^pi`` by a direct linear solve."""
    gamma = _check_discount(gamma)
    pi = as_policy(pi)
    _check_policy(mdp, pi)
    rew = state_rewards(mdp, r)
    a = np.eye(mdp.n_states) - gamma * policy_matrix(mdp, pi)
    v = np.linalg.solve(a, rew)
    # one step of iterative refinement keeps the residual near machine precision
    v += np.linalg.solve(a, rew - a @ v)
    return ValueTables(v, q_from_v(mdp, rew, v, gamma))


def greedy(q: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ``np.argmax`` already breaks ties toward index 0."""
    return np.argmax(q, axis=1)


def optimal_policy(mdp: Mdp, r: RewardLike, gamma: float) -> tuple[Policy, ValueTables]:
    gamma = _check_discount(gamma)
    rew = state_rewards(mdp, r)
    t = mdp.continuation()
    v = rew.copy()
    for _ in range(VI_MAX_SWEEPS):
        q = rew[:, None] + gamma * (t @ v)
        v_new = q.max(axis=1)
        done = np.max(np.abs(v_new - v)) < VI_TOL
        v = v_new
        if done:
            break
    q = rew[:, None] + gamma * (t @ v)
    return Policy(greedy(q)), ValueTables(q.max(axis=1), q)


def state_gaps(mdp: Mdp, q: np.ndarray, pi: Policy) -> np.ndarray:
    """Per-state gap ``Q(s, pi(s)) - max_{a != pi(s)} Q(s, a)``; NaN at terminals."""
    if mdp.n_actions < 2:
        raise ValueError("action gap is undefined for a single-action MDP")
    idx = np.arange(mdp.n_states)
    acts = np.where(mdp.terminal, 0, pi.actions)
    chosen = q[idx, acts]
    others = q.copy()
    others[idx, acts] = -np.inf
    gaps = chosen - others.max(axis=1)
    gaps[mdp.terminal] = np.nan
    return gaps


def action_gap(mdp: Mdp, r: RewardLike, pi_plus: PolicyLike, gamma: float) -> float:
    """Smallest margin by which the target action beats every alternative.

    Negative when some alternative is strictly better, i.e. the reward is not
    correct for ``pi_plus`` at this discount.
    """
    pi_plus = as_policy(pi_plus)
    if mdp.n_actions < 2:
        raise ValueError("action gap is undefined for a single-action MDP")
    vt = evaluate_policy(mdp, r, pi_plus, gamma)
    return float(np.nanmin(state_gaps(mdp, vt.q, pi_plus)))


def is_correct(mdp: Mdp, r: RewardLike, pi_plus: PolicyLike, gamma: float) -> bool:
    return action_gap(mdp, r, pi_plus, gamma) > 0.0
