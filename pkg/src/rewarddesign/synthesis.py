"""Reward synthesis by linear programming.

The program chooses feature weights ``w`` in ``[-1, 1]`` and a margin
``delta`` and maximizes ``delta`` subject to: at every non-terminal state, the
target action beats each alternative by at least ``delta``, both at the
objective discount and at a designer-chosen subjective discount.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .features import compute_feature_expectations, gap_rows
from .mdp import Mdp, PolicyLike, RewardVector, action_gap, as_policy
from .simplex import LpProblem, solve_lp

log = logging.getLogger(__name__)

DELTA_BOX = 10.0
DEFAULT_FLOOR = 0.01


class SynthesisError(RuntimeError):
    """The requested reward design has no solution."""


class NoCorrectRewardError(SynthesisError):
    """Best achievable margin is not positive: no correct reward in the class."""


class FloorInfeasibleError(SynthesisError):
    """Even the objective discount alone cannot reach the requested gap floor."""


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    gamma: float
    gamma_tilde: float
    status: str                       # "ok" | "no_correct_reward" | "infeasible"
    reward: Optional[RewardVector] = None
    delta: float = float("nan")
    objective_gap: float = float("nan")
    subjective_gap: float = float("nan")

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _constraint_rows(mdp: Mdp, pi_plus, discounts: Iterable[float]) -> np.ndarray:
    blocks = []
    for disc in discounts:
        fe = compute_feature_expectations(mdp, pi_plus, disc)
        rows, _ = gap_rows(mdp, fe, pi_plus)
        blocks.append(rows)
    return np.vstack(blocks)


def _check_policy_defined(mdp: Mdp, pi_plus) -> None:
    acts = pi_plus.actions[mdp.nonterminal] if len(pi_plus) == mdp.n_states else None
    if acts is None or np.any((acts < 0) | (acts >= mdp.n_actions)):
        raise ValueError("target policy must name a valid action for every non-terminal state")


def build_lp(mdp: Mdp, pi_plus: PolicyLike, gamma: float, gamma_tilde: float,
             feature_bounds: Optional[Sequence[tuple]] = None) -> LpProblem:
    """Variables are the feature weights followed by ``delta``.

    Each row reads ``sum_i (D_a(s,i) - D(s,i)) w_i + delta <= 0``; rows for
    ``gamma`` come first, then rows for ``gamma_tilde``.
    """
    pi_plus = as_policy(pi_plus)
    _check_policy_defined(mdp, pi_plus)
    rows = _constraint_rows(mdp, pi_plus, (gamma, gamma_tilde))
    k = mdp.n_features
    a = np.hstack([-rows, np.ones((rows.shape[0], 1))])
    c = np.zeros(k + 1)
    c[-1] = 1.0
    if feature_bounds is None:
        lo, up = -np.ones(k), np.ones(k)
    else:
        lo, up = np.array(feature_bounds, float).T
    return LpProblem(c, a, np.zeros(rows.shape[0]),
                     np.append(lo, -DELTA_BOX), np.append(up, DELTA_BOX),
                     tuple(mdp.feature_names) + ("delta",))


def synthesize(mdp: Mdp, pi_plus: PolicyLike, gamma: float, gamma_tilde: float,
               feature_bounds: Optional[Sequence[tuple]] = None) -> SynthesisResult:
    """Solve the margin-maximizing program and re-measure both gaps.

    Raises ``NoCorrectRewardError`` if the optimal margin is not positive.
    """
    res = _solve(mdp, pi_plus, gamma, gamma_tilde, feature_bounds)
    if res.status == "no_correct_reward":
        raise NoCorrectRewardError(
            f"no correct reward exists in the class (delta* = {res.delta:.3g} "
            f"at gamma={gamma}, gamma_tilde={gamma_tilde})")
    if res.status != "ok":
        raise SynthesisError(f"linear program {res.status}")
    return res


def _solve(mdp, pi_plus, gamma, gamma_tilde, feature_bounds=None) -> SynthesisResult:
    pi_plus = as_policy(pi_plus)
    lp = build_lp(mdp, pi_plus, gamma, gamma_tilde, feature_bounds)
    sol = solve_lp(lp)
    if not sol.optimal:
        return SynthesisResult(gamma, gamma_tilde, sol.status)
    w = np.clip(sol.x[:-1], -1.0, 1.0)
    delta = float(sol.x[-1])
    if delta <= 1e-12:
        return SynthesisResult(gamma, gamma_tilde, "no_correct_reward", RewardVector(w, strict=True), delta)
    reward = RewardVector(w, strict=True)
    return SynthesisResult(gamma, gamma_tilde, "ok", reward, delta,
                           action_gap(mdp, reward, pi_plus, gamma),
                           action_gap(mdp, reward, pi_plus, gamma_tilde))


def min_subjective_discount_synthesis(mdp: Mdp, pi_plus: PolicyLike, gamma: float,
                                      delta_floor: float = DEFAULT_FLOOR,
                                      tol: float = 1e-4,
                                      feature_bounds=None) -> tuple[SynthesisResult, float]:
    """Bisect for the smallest ``gamma_tilde`` in ``[0, gamma]`` whose optimum reaches the floor."""
    if delta_floor <= 0:
        raise ValueError("delta_floor must be positive")

    def reaches(gt):
        res = _solve(mdp, pi_plus, gamma, gt, feature_bounds)
        return res, res.status in ("ok", "no_correct_reward") and res.delta >= delta_floor

    top, ok = reaches(gamma)
    if not ok:
        raise FloorInfeasibleError(
            f"target policy cannot be induced with gap >= {delta_floor} "
            f"(best is {top.delta:.6g} at gamma_tilde = gamma)")
    bottom, ok = reaches(0.0)
    if ok:
        return bottom, 0.0
    lo, hi, best = 0.0, float(gamma), top
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        res, ok = reaches(mid)
        if ok:
            hi, best = mid, res
        else:
            lo = mid
    return best, hi


def gamma_tilde_sweep(mdp: Mdp, pi_plus: PolicyLike, gamma: float,
                      grid: Sequence[float], feature_bounds=None) -> list[SynthesisResult]:
    out = []
    for gt in grid:
        if not 0.0 <= gt <= gamma:
            raise ValueError(f"sweep point {gt} outside [0, {gamma}]")
        res = _solve(mdp, pi_plus, gamma, float(gt), feature_bounds)
        if not res.ok:
            log.info("sweep point gamma_tilde=%s: %s", gt, res.status)
        out.append(res)
    return out


def default_sweep_grid(gamma: float, step: float = 0.05) -> list[float]:
    grid = list(np.round(np.arange(0.0, gamma + 1e-12, step), 10))
    if grid[-1] < gamma - 1e-12:
        grid.append(gamma)
    return [float(g) for g in grid]


def low_gap_dense_reward(mdp: Mdp, pi_plus: PolicyLike, gamma: float,
                         epsilon: float = 0.001) -> RewardVector:
    """A correct reward whose margins all sit as close to ``epsilon`` as possible.

    Minimizes the total margin over every (state, alternative action) pair
    subject to each margin being at least ``epsilon``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    pi_plus = as_policy(pi_plus)
    _check_policy_defined(mdp, pi_plus)
    rows = _constraint_rows(mdp, pi_plus, (gamma,))
    k = mdp.n_features
    lp = LpProblem(-rows.sum(axis=0), -rows, -epsilon * np.ones(rows.shape[0]),
                   -np.ones(k), np.ones(k), tuple(mdp.feature_names))
    sol = solve_lp(lp)
    if not sol.optimal:
        raise SynthesisError(f"no reward achieves gap {epsilon}: {sol.status}")
    return RewardVector(np.clip(sol.x, -1.0, 1.0), strict=True)

