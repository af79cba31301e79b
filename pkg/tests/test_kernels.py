"""The compiled kernels must reproduce the Python reference path draw for draw."""

import numpy as np
import pytest

from simple_regret import kernels
from simple_regret.bandit import (
    KIND_CODES,
    BanditView,
    PolicySpec,
    recommend,
    recommendation_regret,
    select,
)
from simple_regret.envs import BernoulliBandit, SailingConfig, SailingMdp, SwitchTree, as_mdp
from simple_regret.mcts import SearchParams, play_episode, search

POLICIES = ["ucb:2", "ucbsqrt:2", "ucbsqrt:0.3", "eps:0.5", "uniform", "voi"]


def _kind(text):
    p = PolicySpec.parse(text)
    return KIND_CODES[p.kind], float(p.c), float(p.epsilon)


@pytest.mark.parametrize("policy", POLICIES)
def test_bandit_kernel_matches_python(policy):
    bandit = BernoulliBandit(tuple(np.random.default_rng(1).random(7)))
    spec = PolicySpec.parse(policy)
    checkpoints = np.array([7, 20, 150, 600])

    rng = np.random.default_rng(42)
    view = BanditView.empty(bandit.k)
    expected_regret, expected_rec = [], []
    for t in range(1, checkpoints[-1] + 1):
        arm = select(view, spec, rng)
        view.add(arm, 1.0 if rng.random() < bandit.means[arm] else 0.0)
        if t in checkpoints:
            expected_regret.append(recommendation_regret(bandit.truth, view))
            expected_rec.append(recommend(view))

    regrets, recs, pulls, sums = kernels.run_bandit(
        np.asarray(bandit.means), np.asarray(bandit.truth.gaps), *_kind(policy),
        checkpoints, np.random.default_rng(42),
    )
    assert list(recs) == expected_rec
    assert list(regrets) == expected_regret
    assert list(pulls) == view.pulls
    assert list(sums) == [a.reward_sum for a in view.arms]


@pytest.mark.parametrize("policy", POLICIES)
def test_switch_tree_kernel_matches_search(policy):
    tree = SwitchTree(tuple(np.random.default_rng(2).random(6)))
    budget = 400
    params = SearchParams(PolicySpec.parse(policy), depth_cutoff=2, budget=budget)
    action, root = search(as_mdp(tree), params, np.random.default_rng(8))
    _, recs, pulls, sums = kernels.run_switch_tree(
        np.asarray(tree.switches), np.asarray(tree.truth.gaps),
        *_kind(policy), *_kind("ucb:2"), np.array([budget]), np.random.default_rng(8),
    )
    assert recs[0] == action
    assert list(pulls) == root.stats.pulls
    assert list(sums) == [a.reward_sum for a in root.stats.arms]


def _sailing_args(mdp: SailingMdp):
    c = mdp.config
    return (
        np.asarray(c.angle_costs), c.diagonal_factor, c.tack_delay,
        np.cumsum(c.wind_matrix, axis=1), c.max_step_cost,
    )


@pytest.mark.parametrize("policy", POLICIES)
@pytest.mark.parametrize("state", [(0, 0, 0, 3), (2, 1, -1, 6), (3, 4, 1, 0)])
def test_sailing_search_matches_engine(policy, state):
    mdp = SailingMdp(5, SailingConfig(), initial_wind=state[3])
    params = SearchParams(
        PolicySpec.parse(policy), depth_cutoff=6, budget=120,
        reward_transform=mdp.reward_transform,
    )
    action, root = search(mdp, params, np.random.default_rng(5), state)
    d, acts, pulls, sums = kernels.sailing_search(
        5, *state, *_sailing_args(mdp), *_kind(policy), *_kind("ucb:2"),
        120, 6, np.random.default_rng(5),
    )
    assert d == action
    assert list(acts) == root.actions
    assert list(pulls) == root.stats.pulls
    assert np.array_equal(sums, [a.reward_sum for a in root.stats.arms])


@pytest.mark.parametrize("policy", ["ucb:2", "ucbsqrt:2", "eps:0.5"])
def test_sailing_episode_matches_engine(policy):
    mdp = SailingMdp(4, SailingConfig(), initial_wind=5)
    params = SearchParams(
        PolicySpec.parse(policy), depth_cutoff=12, budget=60,
        reward_transform=mdp.reward_transform,
    )
    expected = play_episode(
        mdp, params, np.random.default_rng(1), np.random.default_rng(2), max_steps=40
    )
    got = kernels.sailing_episode(
        4, 5, *_sailing_args(mdp), *_kind(policy), *_kind("ucb:2"), 60, 12, 40,
        np.random.default_rng(1), np.random.default_rng(2),
    )
    assert got == expected
