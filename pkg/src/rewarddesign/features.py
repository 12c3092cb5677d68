"""Discounted feature expectations of a target policy.

``D(s, i)`` is the expected discounted count of feature ``i`` when following
the target policy from ``s``; ``D_a(s, i)`` takes action ``a`` first and then
follows the target policy. Values are linear in the reward weights:
``V = D @ w`` and ``Q[:, a] = D_a[:, a] @ w``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp import (Mdp, PolicyLike, RewardLike, ValueTables, _check_discount,
                  _check_policy, as_policy, as_reward, policy_matrix)


@dataclass(frozen=True, eq=False)
class FeatureExpectations:
    discount: float
    d: np.ndarray           # (S, k)
    d_action: np.ndarray    # (S, A, k)


def compute_feature_expectations(mdp: Mdp, pi_plus: PolicyLike,
                                 discount: float) -> FeatureExpectations:
    discount = _check_discount(discount)
    pi_plus = as_policy(pi_plus)
    _check_policy(mdp, pi_plus)
    f = mdp.features
    a = np.eye(mdp.n_states) - discount * policy_matrix(mdp, pi_plus)
    d = np.linalg.solve(a, f)
    d += np.linalg.solve(a, f - a @ d)
    d_action = f[:, None, :] + discount * np.einsum("sat,ti->sai", mdp.continuation(), d)
    d.setflags(write=False)
    d_action.setflags(write=False)
    return FeatureExpectations(discount, d, d_action)


def value_from_expectations(fe: FeatureExpectations, r: RewardLike) -> ValueTables:
    w = as_reward(r).weights
    if len(w) != fe.d.shape[1]:
        raise ValueError(f"reward has {len(w)} weights, expectations have {fe.d.shape[1]} features")
    return ValueTables(fe.d @ w, fe.d_action @ w)


def gap_rows(mdp: Mdp, fe: FeatureExpectations, pi_plus: PolicyLike):
    """Rows ``D(s) - D_a(s)`` for every non-terminal ``s`` and ``a != pi(s)``.

    ``rows @ w`` is the vector of per-(state, action) margins of the target
    action, so the action gap of ``w`` is ``min(rows @ w)``. Returns the row
    matrix and the matching ``(state, action)`` index pairs.
    """
    pi_plus = as_policy(pi_plus)
    index = [(s, a) for s in mdp.nonterminal for a in range(mdp.n_actions)
             if a != pi_plus[s]]
    if not index:
        return np.zeros((0, mdp.n_features)), index
    s_idx = np.array([p[0] for p in index])
    a_idx = np.array([p[1] for p in index])
    rows = fe.d[s_idx] - fe.d_action[s_idx, a_idx]
    return rows, index
