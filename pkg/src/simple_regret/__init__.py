"""Simple-regret sampling policies for bandits and Monte-Carlo tree search."""

from .bandit import (
    ArmStats,
    BanditView,
    PolicyKind,
    PolicySpec,
    TrueArms,
    realized_regret,
    recommend,
    recommendation_regret,
    record_reward,
    select,
    ucb_score,
    ucb_sqrt_score,
    voi_estimates,
)
from .bounds import BoundParams, bound_eps_greedy, bound_ucb_sqrt, bound_uniform
from .mcts import RewardTransform, SearchNode, SearchParams, rollout, search, transform_reward

__all__ = [
    "ArmStats",
    "BanditView",
    "BoundParams",
    "PolicyKind",
    "PolicySpec",
    "RewardTransform",
    "SearchNode",
    "SearchParams",
    "TrueArms",
    "bound_eps_greedy",
    "bound_ucb_sqrt",
    "bound_uniform",
    "realized_regret",
    "recommend",
    "recommendation_regret",
    "record_reward",
    "rollout",
    "search",
    "select",
    "transform_reward",
    "ucb_score",
    "ucb_sqrt_score",
    "voi_estimates",
]
