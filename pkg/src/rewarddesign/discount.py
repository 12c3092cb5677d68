"""Subjective discount of a reward function.

The subjective discount is the smallest discount ``g`` such that the target
policy keeps an action gap of at least ``delta_threshold`` at every discount
in ``[g, gamma]``. It is found by bisection, then audited on an evenly spaced
grid; an audit failure moves the lower end up and the search resumes.

When the gap at ``gamma`` itself is positive but below the threshold the
result is undefined, unless ``search_above`` is set: the search then
continues above ``gamma`` and reports the first discount where the gap
reaches the threshold (``above_gamma`` is then set).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .mdp import Mdp, PolicyLike, RewardLike, action_gap, as_policy, as_reward

ABOVE_GAMMA_GRID = 400
MAX_DISCOUNT = 1.0 - 1e-9


@dataclass(frozen=True)
class AuditPoint:
    discount: float
    correct: bool
    gap: float


@dataclass(frozen=True)
class SubjectiveDiscountReport:
    gamma_tilde: Optional[float]
    gap_at_gamma_tilde: float
    checked_points: list = field(default_factory=list)
    above_gamma: bool = False

    @property
    def defined(self) -> bool:
        return self.gamma_tilde is not None

    def rows(self):
        """CSV rows: a summary row followed by one row per audit point."""
        gt = "undefined" if self.gamma_tilde is None else repr(self.gamma_tilde)
        out = [("summary", gt, repr(self.gap_at_gamma_tilde), "")]
        out += [("audit", repr(p.discount), repr(p.gap), int(p.correct)) for p in self.checked_points]
        return out


REPORT_COLUMNS = ("kind", "discount", "gap", "correct")


def subjective_discount(mdp: Mdp, r: RewardLike, pi_plus: PolicyLike, gamma: float,
                        delta_threshold: float = 0.01, tol: float = 1e-4,
                        search_above: bool = False,
                        audit_points: int = 11) -> SubjectiveDiscountReport:
    if not delta_threshold > 0:
        raise ValueError("delta_threshold must be positive")
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    r = as_reward(r)
    pi_plus = as_policy(pi_plus)
    audit = []

    def gap(g):
        return action_gap(mdp, r, pi_plus, g)

    def record(g):
        value = gap(g)
        audit.append(AuditPoint(float(g), value > 0, value))
        return value

    g_top = record(gamma)
    if g_top < delta_threshold:
        if not (search_above and g_top > 0):
            return SubjectiveDiscountReport(None, g_top, audit)
        return _search_above(gamma, delta_threshold, tol, gap, record, audit)

    lo, hi = 0.0, float(gamma)
    if gap(0.0) >= delta_threshold:
        hi = 0.0
    while True:
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if gap(mid) >= delta_threshold:
                hi = mid
            else:
                lo = mid
        grid = np.linspace(hi, gamma, audit_points)
        gaps = [record(g) for g in grid]
        failing = [i for i, v in enumerate(gaps) if v < delta_threshold]
        if not failing:
            return SubjectiveDiscountReport(float(hi), gaps[0], audit)
        worst = failing[-1]
        lo, hi = float(grid[worst]), float(grid[worst + 1])


def _search_above(gamma, threshold, tol, gap, record, audit) -> SubjectiveDiscountReport:
    grid = np.linspace(gamma, MAX_DISCOUNT, ABOVE_GAMMA_GRID + 1)[1:]
    prev = float(gamma)
    for g in grid:
        if record(g) >= threshold:
            lo, hi = prev, float(g)
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if gap(mid) >= threshold:
                    hi = mid
                else:
                    lo = mid
            return SubjectiveDiscountReport(hi, record(hi), audit, above_gamma=True)
        prev = float(g)
    return SubjectiveDiscountReport(None, audit[0].gap, audit)
