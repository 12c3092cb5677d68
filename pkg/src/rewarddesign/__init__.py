"""Reward design for tabular MDPs: action gaps, subjective discounts, LP synthesis."""
from .discount import SubjectiveDiscountReport, subjective_discount
from .environments import chain, get_environment, load_environment, russell_norvig_grid
from .features import FeatureExpectations, compute_feature_expectations, value_from_expectations
from .learning import AggregateCurve, QLearningConfig, RunTrace, aggregate_runs, q_learning_run
from .mdp import (Mdp, Policy, RewardVector, ValueTables, action_gap, evaluate_policy,
                  is_correct, optimal_policy, reward_of_state)
from .random_search import sample_and_filter, study
from .simplex import LpProblem, LpSolution, solve_lp
from .synthesis import (SynthesisResult, build_lp, gamma_tilde_sweep, low_gap_dense_reward,
                        min_subjective_discount_synthesis, synthesize)

__version__ = "0.1.0"

__all__ = [
    "AggregateCurve", "FeatureExpectations", "LpProblem", "LpSolution", "Mdp", "Policy",
    "QLearningConfig", "RewardVector", "RunTrace", "SubjectiveDiscountReport", "SynthesisResult",
    "ValueTables", "action_gap", "aggregate_runs", "build_lp", "chain",
    "compute_feature_expectations", "evaluate_policy", "gamma_tilde_sweep", "get_environment",
    "is_correct", "load_environment", "low_gap_dense_reward", "min_subjective_discount_synthesis",
    "optimal_policy", "q_learning_run", "reward_of_state", "russell_norvig_grid",
    "sample_and_filter", "solve_lp", "study", "subjective_discount", "synthesize",
    "value_from_expectations",
]
