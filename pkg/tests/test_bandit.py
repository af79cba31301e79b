import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from simple_regret.bandit import (
    BanditView,
    PolicyKind,
    PolicySpec,
    TrueArms,
    realized_regret,
    recommend,
    recommendation_regret,
    record_reward,
    select,
    tied_best,
    ucb_score,
    ucb_sqrt_score,
    voi_estimates,
    voi_from_stats,
)

mpmath.mp.dps = 40


def view_of(pulls, sums):
    return BanditView.from_counts(pulls, sums)


# --- record_reward ------------------------------------------------------------


def test_record_single_reward():
    view = record_reward(BanditView.empty(2), 0, 1.0)
    assert view.arms[0].pulls == 1
    assert view.arms[0].reward_sum == 1.0
    assert view.arms[0].mean == 1.0
    assert view.total_pulls == 1


def test_record_two_rewards_same_arm():
    view = BanditView.empty(2)
    record_reward(view, 0, 0.0)
    record_reward(view, 0, 1.0)
    assert (view.arms[0].pulls, view.arms[0].reward_sum, view.arms[0].mean) == (2, 1.0, 0.5)


def test_record_leaves_other_arms_untouched():
    view = view_of([3, 2], [1.25, 0.5])
    before = (view.arms[0].pulls, view.arms[0].reward_sum)
    record_reward(view, 1, 0.75)
    assert (view.arms[0].pulls, view.arms[0].reward_sum) == before
    assert view.total_pulls == 6


@pytest.mark.parametrize("arm", [-1, 2])
def test_record_rejects_bad_arm(arm):
    with pytest.raises(IndexError):
        record_reward(BanditView.empty(2), arm, 0.5)


@pytest.mark.parametrize("reward", [-0.01, 1.01])
def test_record_rejects_unbounded_reward(reward):
    with pytest.raises(ValueError):
        record_reward(BanditView.empty(2), 0, reward)


def test_unpulled_mean_is_nan():
    assert math.isnan(BanditView.empty(2).arms[0].mean)


# --- scores -------------------------------------------------------------------


def test_ucb_score_log_one():
    assert ucb_score(0.5, 1, 1, 2) == 0.5


def test_ucb_score_at_e_squared():
    n = float(mpmath.e**2)
    assert ucb_score(0.0, 2, n, 1) == pytest.approx(1.0, rel=1e-12)


def test_ucb_score_high_precision():
    oracle = mpmath.mpf("0.3") + mpmath.sqrt(2 * mpmath.log(100) / 4)
    assert float(oracle) == pytest.approx(1.817427, abs=1e-6)
    assert ucb_score(0.3, 4, 100, 2) == pytest.approx(float(oracle), rel=1e-12)


def test_ucb_sqrt_score_examples():
    assert ucb_sqrt_score(0.0, 1, 1, 1) == 1.0
    assert ucb_sqrt_score(0.5, 2, 16, 2) == 2.5
    # c = 0 is rejected by PolicySpec but the formula reduces to the mean
    assert ucb_sqrt_score(0.4, 3, 50, 0.0) == 0.4


def test_scores_reject_unpulled_arm():
    with pytest.raises(ValueError):
        ucb_score(0.5, 0, 10, 2)
    with pytest.raises(ValueError):
        ucb_sqrt_score(0.5, 0, 10, 2)


@given(
    mean=st.floats(0, 1),
    n_i=st.integers(1, 50),
    n=st.integers(1, 10_000),
    c=st.floats(0.01, 10),
)
def test_scores_increase_with_total_pulls(mean, n_i, n, c):
    n = max(n, n_i)
    assert ucb_score(mean, n_i, n + 1, c) > ucb_score(mean, n_i, n, c)
    assert ucb_sqrt_score(mean, n_i, n + 1, c) > ucb_sqrt_score(mean, n_i, n, c)
    if n >= 3:
        assert ucb_sqrt_score(mean, n_i, n, c) >= ucb_score(mean, n_i, n, c)


# --- PolicySpec ----------------------------------------------------------------


def test_policy_parse_and_label():
    assert PolicySpec.parse("ucb:2") == PolicySpec(PolicyKind.UCB, c=2.0)
    assert PolicySpec.parse("eps:0.25").epsilon == 0.25
    assert PolicySpec.parse("ucbsqrt:0.5").label == "ucbsqrt:0.5"
    assert PolicySpec.parse("voi").kind is PolicyKind.VOI_AWARE
    assert PolicySpec.parse("uniform").label == "uniform"


@pytest.mark.parametrize("text", ["ucb:0", "ucbsqrt:-1", "eps:0", "eps:1", "bogus", "uniform:3"])
def test_policy_parse_rejects(text):
    with pytest.raises(ValueError):
        PolicySpec.parse(text)


# --- select -------------------------------------------------------------------


@pytest.mark.parametrize("kind", ["ucb:2", "ucbsqrt:2", "eps:0.5", "uniform", "voi"])
def test_forced_pull_returns_lowest_unpulled(kind):
    view = view_of([3, 0, 0, 2], [1.0, 0.0, 0.0, 2.0])
    assert select(view, PolicySpec.parse(kind), np.random.default_rng(0)) == 1


def test_select_needs_two_arms():
    with pytest.raises(ValueError):
        select(view_of([1], [1.0]), PolicySpec.parse("ucb:2"), np.random.default_rng(0))


def _frequencies(view, spec, draws, seed=0):
    rng = np.random.default_rng(seed)
    counts = np.bincount([select(view, spec, rng) for _ in range(draws)], minlength=len(view))
    return counts


def test_eps_greedy_distribution():
    view = view_of([4, 4, 4], [3.0, 1.0, 2.0])
    draws = 100_000
    counts = _frequencies(view, PolicySpec.parse("eps:0.5"), draws)
    expected = np.array([0.5, 0.25, 0.25])
    se = np.sqrt(expected * (1 - expected) / draws)
    assert np.all(np.abs(counts / draws - expected) <= 3 * se)


def test_eps_greedy_at_one_over_k_is_uniform():
    k = 4
    view = view_of([5] * k, [4.0, 1.0, 2.0, 3.0])
    draws = 100_000
    counts = _frequencies(view, PolicySpec(PolicyKind.EPS_GREEDY, epsilon=1 / k), draws)
    se = math.sqrt((1 / k) * (1 - 1 / k) / draws)
    assert np.all(np.abs(counts / draws - 1 / k) <= 3 * se)


def test_uniform_distribution():
    view = view_of([2, 9, 4], [2.0, 0.0, 1.0])
    counts = _frequencies(view, PolicySpec.parse("uniform"), 60_000)
    assert stats.chisquare(counts).pvalue > 0.001


def test_ucb_picks_argmax_score():
    view = view_of([10, 2, 10], [9.0, 1.0, 5.0])
    scores = [ucb_score(a.mean, a.pulls, 22, 2.0) for a in view.arms]
    assert select(view, PolicySpec.parse("ucb:2"), np.random.default_rng(0)) == int(np.argmax(scores))


def test_argmax_ties_broken_uniformly():
    view = view_of([3, 3, 3], [1.0, 1.0, 1.0])
    counts = _frequencies(view, PolicySpec.parse("ucb:2"), 30_000)
    assert stats.chisquare(counts).pvalue > 0.001


def test_ucb_permutation_invariance():
    pulls = [3, 3, 5, 2]
    sums = [1.0, 1.0, 2.0, 1.0]  # arms 0 and 1 tie
    perm = [2, 0, 3, 1]
    inv = np.argsort(perm)
    spec = PolicySpec.parse("ucb:2")
    base = _frequencies(view_of(pulls, sums), spec, 40_000, seed=1)
    permuted_view = view_of([pulls[p] for p in perm], [sums[p] for p in perm])
    rng = np.random.default_rng(2)
    back = np.bincount([perm[select(permuted_view, spec, rng)] for _ in range(40_000)], minlength=4)
    table = np.array([base, back])
    table = table[:, table.sum(axis=0) > 0]
    assert stats.chi2_contingency(table).pvalue > 0.001
    assert list(inv) == [1, 3, 0, 2]


# --- VOI ----------------------------------------------------------------------


def test_voi_equal_means_no_samples():
    assert voi_from_stats([0.5, 0.5], [0, 3])[0] == 0.5


def test_voi_current_best():
    oracle = mpmath.mpf("0.5") / 5 * mpmath.exp(-2 * mpmath.mpf("0.1") ** 2 * 4)
    assert float(oracle) == pytest.approx(0.0923116, abs=1e-7)
    value = voi_estimates(view_of([4, 7], [2.4, 3.5]))[0]
    assert value == pytest.approx(float(oracle), rel=1e-9)


def test_voi_other_arm():
    oracle = mpmath.mpf("0.2") / 10 * mpmath.exp(-2 * mpmath.mpf("0.3") ** 2 * 9)
    assert float(oracle) == pytest.approx(0.0039580, abs=1e-7)
    value = voi_estimates(view_of([5, 9], [4.0, 4.5]))[1]
    assert value == pytest.approx(float(oracle), rel=1e-9)


def test_voi_requires_pulled_arms():
    with pytest.raises(ValueError):
        voi_estimates(view_of([1, 0], [1.0, 0.0]))
    with pytest.raises(ValueError):
        voi_estimates(view_of([1], [1.0]))


means_and_pulls = st.integers(2, 8).flatmap(
    lambda k: st.tuples(
        st.lists(st.floats(0, 1), min_size=k, max_size=k),
        st.lists(st.integers(1, 200), min_size=k, max_size=k),
    )
)


@given(means_and_pulls)
def test_voi_in_unit_interval(mp):
    means, pulls = mp
    for v in voi_from_stats(means, pulls):
        assert 0.0 <= v <= 1.0


@given(means_and_pulls, st.integers(0, 7))
def test_voi_decreasing_in_pulls(mp, which):
    means, pulls = mp
    i = which % len(means)
    more = list(pulls)
    more[i] += 1
    after, before = voi_from_stats(means, more)[i], voi_from_stats(means, pulls)[i]
    assert after <= before
    if before > 1e-300:
        assert after < before


def test_voi_equal_means_exponent_is_one():
    # arm 2 ties the leader, so only the 1/(n+1) factor remains
    out = voi_from_stats([0.7, 0.2, 0.7], [4, 4, 6])
    assert out[2] == pytest.approx((1 - 0.7) / 7, rel=1e-15)


# --- recommendation and regret -------------------------------------------------


def test_recommend_lowest_index_tie():
    assert recommend(view_of([1, 10, 10], [0.2, 9.0, 9.0])) == 1


def test_recommend_single_pulled_arm():
    assert recommend(view_of([0, 3, 0], [0.0, 0.3, 0.0])) == 1


def test_recommend_basic():
    assert recommend(view_of([5, 10], [2.0, 7.0])) == 1


def test_recommend_needs_a_pull():
    with pytest.raises(ValueError):
        recommend(BanditView.empty(3))


def test_realized_regret():
    truth = TrueArms((0.9, 0.5, 0.2))
    assert realized_regret(truth, 2) == pytest.approx(0.7)
    assert realized_regret(truth, 0) == 0.0
    with pytest.raises(IndexError):
        realized_regret(truth, 3)


def test_true_arms_gaps():
    truth = TrueArms((0.3, 0.8))
    assert truth.best_mean == 0.8
    assert min(truth.gaps) == 0.0
    assert all(g >= 0 for g in truth.gaps)


def _enumerate_two_arm(truth, tie_average):
    # brute force over the 4 Bernoulli outcomes of one pull per arm
    total = 0.0
    for x0, x1 in itertools.product((0, 1), repeat=2):
        prob = (truth.means[0] if x0 else 1 - truth.means[0]) * (
            truth.means[1] if x1 else 1 - truth.means[1]
        )
        if x0 == x1:
            regret = sum(truth.gaps) / 2 if tie_average else truth.gaps[0]
        else:
            regret = truth.gaps[0 if x0 > x1 else 1]
        total += prob * regret
    return total


def test_two_arm_regret_oracles():
    truth = TrueArms((0.9, 0.1))
    assert _enumerate_two_arm(truth, tie_average=True) == pytest.approx(0.08)
    assert _enumerate_two_arm(truth, tie_average=False) == pytest.approx(0.008)


def test_two_arm_monte_carlo_matches_enumeration():
    truth = TrueArms((0.9, 0.1))
    reps = 100_000
    rng = np.random.default_rng(2024)
    draws = rng.random((reps, 2)) < np.array(truth.means)
    tie_avg = np.empty(reps)
    lowest = np.empty(reps)
    for r in range(reps):
        view = view_of([1, 1], [float(draws[r, 0]), float(draws[r, 1])])
        tie_avg[r] = recommendation_regret(truth, view)
        lowest[r] = realized_regret(truth, recommend(view))
    for values, target in ((tie_avg, 0.08), (lowest, 0.008)):
        se = values.std(ddof=1) / math.sqrt(reps)
        assert abs(values.mean() - target) <= 3 * se


def test_tied_best_and_tie_averaged_regret():
    view = view_of([2, 2, 2], [1.0, 2.0, 2.0])
    assert tied_best(view) == [1, 2]
    truth = TrueArms((0.9, 0.5, 0.3))
    assert recommendation_regret(truth, view) == pytest.approx((0.4 + 0.6) / 2)


@settings(max_examples=50)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=10), st.integers(0, 2**32 - 1))
def test_select_is_total_and_in_range(means, seed):
    rng = np.random.default_rng(seed)
    view = view_of([3] * len(means), [3 * m for m in means])
    for text in ("ucb:2", "ucbsqrt:2", "eps:0.5", "uniform", "voi"):
        arm = select(view, PolicySpec.parse(text), rng)
        assert 0 <= arm < len(means)
