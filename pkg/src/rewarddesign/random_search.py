"""Random per-state rewards: correctness filtering and the learning-speed study."""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .discount import subjective_discount
from .features import compute_feature_expectations, gap_rows
from .learning import QLearningConfig, aggregate_runs
from .mdp import Mdp, PolicyLike, RewardVector, as_policy

log = logging.getLogger(__name__)

CHUNK = 100_000


@dataclass(frozen=True, eq=False)
class SearchRecord:
    index: int
    reward: RewardVector
    correct: bool
    gap: float
    subjective_discount: Optional[float] = None
    cumulative_correct: Optional[float] = None


class SampleBatch(Sequence):
    """Sampled rewards stored column-wise; indexing yields ``SearchRecord``."""

    def __init__(self, rewards: np.ndarray, gaps: np.ndarray):
        self.rewards = rewards
        self.gaps = gaps
        self.correct = gaps > 0.0

    def __len__(self):
        return len(self.gaps)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return SearchRecord(int(i), RewardVector(self.rewards[i]), bool(self.correct[i]),
                            float(self.gaps[i]))

    @property
    def n_correct(self) -> int:
        return int(self.correct.sum())

    def fraction_correct(self) -> tuple[float, float]:
        """Point estimate and binomial standard error."""
        n = len(self)
        if n == 0:
            return float("nan"), float("nan")
        p = self.n_correct / n
        return p, float(np.sqrt(p * (1 - p) / n))

    def correct_records(self) -> list[SearchRecord]:
        return [self[i] for i in np.flatnonzero(self.correct)]


def _per_state(mdp: Mdp) -> Mdp:
    if mdp.n_features == mdp.n_states and np.array_equal(mdp.features, np.eye(mdp.n_states)):
        return mdp
    return mdp.with_state_features()


def sample_and_filter(mdp: Mdp, pi_plus: PolicyLike, n_samples: int, seed: int = 0,
                      gamma: Optional[float] = None,
                      pinned: Optional[dict] = None) -> SampleBatch:
    """Draw ``R(s) ~ U[-1, 1]`` per state and mark which draws are correct at ``gamma``.

    ``pinned`` maps state indices to fixed reward values (for example the
    terminal rewards); those states are still drawn, then overwritten, so the
    random stream does not depend on which states are pinned.
    """
    mdp = _per_state(mdp)
    pi_plus = as_policy(pi_plus)
    gamma = mdp.objective_discount if gamma is None else gamma
    rows, _ = gap_rows(mdp, compute_feature_expectations(mdp, pi_plus, gamma), pi_plus)
    rng = np.random.Generator(np.random.Philox(seed))
    rewards = np.empty((n_samples, mdp.n_states))
    gaps = np.empty(n_samples)
    for lo in range(0, n_samples, CHUNK):
        hi = min(lo + CHUNK, n_samples)
        block = rng.uniform(-1.0, 1.0, size=(hi - lo, mdp.n_states))
        for s, value in (pinned or {}).items():
            block[:, s] = value
        rewards[lo:hi] = block
        gaps[lo:hi] = (block @ rows.T).min(axis=1)
    return SampleBatch(rewards, gaps)


@dataclass(frozen=True, eq=False)
class StudyTable:
    records: list
    slope: float
    intercept: float
    p_value: float
    r_value: float

    @property
    def regression_defined(self) -> bool:
        return not np.isnan(self.slope)

    def rows(self):
        out = []
        for rec in self.records:
            gt = "undefined" if rec.subjective_discount is None else repr(rec.subjective_discount)
            out.append((rec.index, int(rec.correct), gt, repr(rec.cumulative_correct)))
        return out


STUDY_COLUMNS = ("sample_index", "correct", "gamma_tilde", "mean_cumulative_correct")


def study(records, mdp: Mdp, pi_plus: PolicyLike, gamma: float, cfg: QLearningConfig,
          n_runs: int, max_rewards: Optional[int] = 500, seed: int = 0,
          delta_threshold: float = 0.01, extra: Sequence = ()) -> StudyTable:
    """Score correct rewards by subjective discount and mean cumulative correct actions.

    ``records`` are correct ``SearchRecord`` objects; at most ``max_rewards``
    of them are kept, chosen with ``seed``. ``extra`` records (for example a
    synthesized reward) are always scored. Rewards without a defined
    subjective discount are scored but left out of the regression.
    """
    mdp = _per_state(mdp)
    records = [r for r in records if r.correct]
    if max_rewards is not None and len(records) > max_rewards:
        rng = np.random.Generator(np.random.Philox(seed))
        keep = np.sort(rng.choice(len(records), size=max_rewards, replace=False))
        records = [records[i] for i in keep]
    scored = []
    for rec in list(records) + list(extra):
        rep = subjective_discount(mdp, rec.reward, pi_plus, gamma, delta_threshold)
        curve = aggregate_runs(mdp, rec.reward, pi_plus, gamma, cfg, n_runs)
        scored.append(SearchRecord(rec.index, rec.reward, rec.correct, rec.gap,
                                   rep.gamma_tilde, curve.final_mean))
    pts = [(r.subjective_discount, r.cumulative_correct) for r in scored[:len(records)]
           if r.subjective_discount is not None]
    if len(pts) >= 3:
        x, y = np.array(pts).T
        fit = stats.linregress(x, y)
        return StudyTable(scored, fit.slope, fit.intercept, fit.pvalue, fit.rvalue)
    log.warning("regression undefined: %d rewards with a defined subjective discount", len(pts))
    nan = float("nan")
    return StudyTable(scored, nan, nan, nan, nan)
