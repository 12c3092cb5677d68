"""Desk-scale reproductions of the chain and grid experiments, written as CSV bundles."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .discount import subjective_discount
from .environments import RN_ORIGINAL, chain, russell_norvig_grid
from .learning import CURVE_COLUMNS, AggregateCurve, QLearningConfig, aggregate_runs, dominates
from .mdp import Mdp, Policy, RewardVector, action_gap
from .random_search import STUDY_COLUMNS, SearchRecord, sample_and_filter, study
from .results import write_csv
from .synthesis import (default_sweep_grid, gamma_tilde_sweep, low_gap_dense_reward,
                        min_subjective_discount_synthesis)

log = logging.getLogger(__name__)

FIG4_CURVES = ("goal", "penalty", "combo", "subgoal-constant", "subgoal-profile")
FIG5_CURVES = ("dense-lp", "dense-lowgap")


@dataclass(frozen=True, eq=False)
class Setup:
    """An environment, a reward for it, and the target policy."""
    mdp: Mdp
    reward: RewardVector
    pi: Policy


def chain_suite(n: int = 60, gamma: float = 0.95, floor: float = 0.01) -> dict[str, Setup]:
    two, pi = chain(n, "two_feature", discount=gamma)
    const, _ = chain(n, "subgoals", constant=True, discount=gamma)
    prof, _ = chain(n, "subgoals", constant=False, discount=gamma)
    dense, _ = chain(n, "dense", discount=gamma)
    prof_res, _ = min_subjective_discount_synthesis(prof, pi, gamma, floor)
    dense_res, _ = min_subjective_discount_synthesis(dense, pi, gamma, floor)
    return {
        "goal": Setup(two, RewardVector([1.0, 0.0]), pi),
        "penalty": Setup(two, RewardVector([0.0, -1.0]), pi),
        "combo": Setup(two, RewardVector([1.0, -1.0]), pi),
        "subgoal-constant": Setup(const, RewardVector([-1.0, 1.0, -0.7]), pi),
        "subgoal-profile": Setup(prof, prof_res.reward, pi),
        "dense-lp": Setup(dense, dense_res.reward, pi),
        "dense-lowgap": Setup(dense, low_gap_dense_reward(dense, pi, gamma), pi),
    }


def learn_suite(suite: dict[str, Setup], names, cfg: QLearningConfig, runs: int,
                workers: int = 1) -> dict[str, AggregateCurve]:
    out = {}
    for name in names:
        st = suite[name]
        out[name] = aggregate_runs(st.mdp, st.reward, st.pi, st.mdp.objective_discount,
                                   cfg, runs, workers)
        log.info("%s: final mean %.1f +- %.1f", name, out[name].final_mean,
                 out[name].half_width[-1] if cfg.steps else 0.0)
    return out


def _describe(suite, curves, out: Path, prefix: str):
    rows = []
    for name, curve in curves.items():
        st = suite[name]
        gamma = st.mdp.objective_discount
        rep = subjective_discount(st.mdp, st.reward, st.pi, gamma, search_above=True)
        lo, hi = curve.final_interval
        rows.append((name, repr(action_gap(st.mdp, st.reward, st.pi, gamma)),
                     "undefined" if rep.gamma_tilde is None else repr(rep.gamma_tilde),
                     repr(curve.final_mean), repr(lo), repr(hi)))
        write_csv(out / f"{prefix}_{name}.csv", "learning-curve", CURVE_COLUMNS, curve.rows())
    write_csv(out / f"{prefix}_summary.csv", "reward-summary",
              ("reward", "action_gap", "gamma_tilde", "final_mean", "ci_low", "ci_high"), rows)


def _check(lines, label, ok):
    lines.append(f"{'PASS' if ok else 'FAIL'}  {label}")


def reproduce_fig4(out: Path, cfg: QLearningConfig, runs: int = 200, workers: int = 1,
                   suite=None) -> list[str]:
    suite = suite or chain_suite()
    curves = learn_suite(suite, FIG4_CURVES, cfg, runs, workers)
    _describe(suite, curves, out, "fig4")
    lines = []
    _check(lines, "combo dominates goal", dominates(curves["combo"], curves["goal"]))
    _check(lines, "penalty dominates goal", dominates(curves["penalty"], curves["goal"]))
    _check(lines, "subgoal-profile dominates subgoal-constant",
           dominates(curves["subgoal-profile"], curves["subgoal-constant"]))
    _check(lines, "combo dominates subgoal-constant",
           dominates(curves["combo"], curves["subgoal-constant"]))
    return lines


def reproduce_fig5(out: Path, cfg: QLearningConfig, runs: int = 200, workers: int = 1,
                   suite=None) -> list[str]:
    suite = suite or chain_suite()
    names = FIG5_CURVES + FIG4_CURVES
    curves = learn_suite(suite, names, cfg, runs, workers)
    _describe(suite, {k: curves[k] for k in FIG5_CURVES}, out, "fig5")
    shapes = ["subgoal-constant", "subgoal-profile", "dense-lp", "dense-lowgap"]
    per_state = {k: suite[k].mdp.features @ suite[k].reward.weights for k in shapes}
    n = suite["dense-lp"].mdp.n_states
    write_csv(out / "fig5_reward_shapes.csv", "reward-shapes", ("state",) + tuple(shapes),
              [(s + 1,) + tuple(repr(float(per_state[k][s])) for k in shapes) for s in range(n)])
    lines = []
    for sparse in FIG4_CURVES:
        _check(lines, f"dense-lp dominates {sparse}", dominates(curves["dense-lp"], curves[sparse]))
    _check(lines, "dense-lp dominates dense-lowgap",
           dominates(curves["dense-lp"], curves["dense-lowgap"]))
    dense = suite["dense-lp"]
    rep = subjective_discount(dense.mdp, dense.reward, dense.pi, dense.mdp.objective_discount)
    _check(lines, f"dense-lp subjective discount {rep.gamma_tilde} <= 0.25",
           rep.gamma_tilde is not None and rep.gamma_tilde <= 0.25)
    inner = np.delete(per_state["dense-lp"], np.flatnonzero(dense.mdp.terminal))
    _check(lines, f"dense-lp intermediate rewards <= 0 (max {inner.max():+.4f})",
           bool(np.all(inner <= 0)))
    return lines


def reproduce_fig3(out: Path, cfg: QLearningConfig, runs: int = 500, step: float = 0.05,
                   workers: int = 1) -> list[str]:
    mdp, pi = russell_norvig_grid()
    gamma = mdp.objective_discount
    rows = []
    for res in gamma_tilde_sweep(mdp, pi, gamma, default_sweep_grid(gamma, step)):
        if res.ok:
            score = aggregate_runs(mdp, res.reward, pi, gamma, cfg, runs, workers).final_mean
            rows.append((repr(res.gamma_tilde), repr(res.delta), repr(res.objective_gap),
                         repr(res.subjective_gap), repr(score), res.status))
        else:
            rows.append((repr(res.gamma_tilde), repr(res.delta), "", "", "", res.status))
    write_csv(out / "fig3_sweep.csv", "gamma-tilde-sweep",
              ("gamma_tilde", "delta", "objective_gap", "subjective_gap", "mean_correct_10k",
               "status"), rows)
    res, gt = min_subjective_discount_synthesis(mdp, pi, gamma)
    lines = []
    _check(lines, f"grid LP reward delta* {res.delta:.5f} >= 0.01 and correct",
           res.delta >= 0.01 and res.objective_gap > 0)
    _check(lines, f"grid minimal gamma_tilde {gt:.4f} <= 0.05", gt <= 0.05)
    return lines


def reproduce_fig2(out: Path, cfg: QLearningConfig, samples: int = 1_000_000,
                   runs: int = 200, max_rewards: int = 500, seed: int = 0,
                   pin_terminals: bool = False) -> list[str]:
    mdp, pi = russell_norvig_grid()
    gamma = mdp.objective_discount
    pinned = None
    if pin_terminals:
        rewards = mdp.features @ np.asarray(RN_ORIGINAL)
        pinned = {int(s): float(rewards[s]) for s in np.flatnonzero(mdp.terminal)}
    batch = sample_and_filter(mdp, pi, samples, seed, pinned=pinned)
    frac, se = batch.fraction_correct()
    # index -1: the three-feature LP reward written per state; -2: the per-state LP reward
    feat, _ = min_subjective_discount_synthesis(mdp, pi, gamma)
    dense, _ = min_subjective_discount_synthesis(mdp.with_state_features(), pi, gamma)
    extra = [SearchRecord(-1, RewardVector(mdp.features @ feat.reward.weights), True, feat.delta),
             SearchRecord(-2, dense.reward, True, dense.delta)]
    table = study(batch.correct_records(), mdp, pi, gamma, cfg, runs, max_rewards, seed,
                  extra=extra)
    write_csv(out / "fig2_scatter.csv", "random-search", STUDY_COLUMNS, table.rows())
    write_csv(out / "fig2_regression.csv", "regression",
              ("n_samples", "n_correct", "fraction_correct", "fraction_se", "slope",
               "intercept", "p_value", "r_value"),
              [(samples, batch.n_correct, repr(frac), repr(se), repr(table.slope),
                repr(table.intercept), repr(table.p_value), repr(table.r_value))])
    lines = []
    _check(lines, f"correct fraction {100 * frac:.5f}% in [0.005%, 0.5%]",
           samples > 0 and 5e-5 <= frac <= 5e-3)
    scores = [r.cumulative_correct for r in table.records[:-2]]
    if scores:
        lp_score = table.records[-2].cumulative_correct
        _check(lines, f"LP reward score {lp_score:.1f} above correct-random median "
                      f"{np.median(scores):.1f}", lp_score > np.median(scores))
    _check(lines, f"regression slope {table.slope:.4g} < 0 with p = {table.p_value:.3g} < 0.01",
           table.regression_defined and table.slope < 0 and table.p_value < 0.01)
    return lines


FIGURES = {"fig2": reproduce_fig2, "fig3": reproduce_fig3, "fig4": reproduce_fig4,
           "fig5": reproduce_fig5}
