"""Compiled fast paths for the experiment families.

Each kernel reproduces the pure-Python route (``bandit.select`` driven by
``mcts.search``) draw for draw: randomness comes only from ``rng.random()`` on
the same NumPy ``Generator``, and every score is evaluated with the same
floating-point expression. The test suite checks the traces are identical.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, types
from numba.typed import Dict

UCB, UCB_SQRT, EPS_GREEDY, UNIFORM, VOI_AWARE = 0, 1, 2, 3, 4

N_DIR = 8
_DX = np.array([0, 1, 1, 1, 0, -1, -1, -1], dtype=np.int64)
_DY = np.array([1, 1, 0, -1, -1, -1, 0, 1], dtype=np.int64)


@njit(cache=True)
def _draw_index(rng, m):
    return min(int(rng.random() * m), m - 1)


@njit(cache=True)
def _argmax_random(values, k, ties, rng):
    best = values[0]
    for i in range(1, k):
        if values[i] > best:
            best = values[i]
    nt = 0
    for i in range(k):
        if values[i] == best:
            ties[nt] = i
            nt += 1
    if nt == 1:
        return ties[0]
    return ties[_draw_index(rng, nt)]


@njit(cache=True)
def _argmax_first(values, k, skip):
    best_i = -1
    for i in range(k):
        if i != skip and (best_i < 0 or values[i] > values[best_i]):
            best_i = i
    return best_i


@njit(cache=True)
def _voi(means, pulls, k, out):
    alpha = _argmax_first(means, k, -1)
    beta = _argmax_first(means, k, alpha)
    top = means[alpha]
    for i in range(k):
        n = pulls[i]
        if i == alpha:
            second = means[beta]
            d = top - second
            out[i] = second / (n + 1) * math.exp(-2.0 * (d * d) * n)
        else:
            d = top - means[i]
            out[i] = (1.0 - top) / (n + 1) * math.exp(-2.0 * (d * d) * n)


@njit(cache=True)
def select_arm(pulls, sums, k, total, kind, c, eps, scratch, scratch2, ties, rng):
    """Mirror of ``bandit.select`` over the first ``k`` entries of the arrays."""
    for i in range(k):
        if pulls[i] == 0:
            return i
    if kind == UNIFORM:
        return _draw_index(rng, k)
    means = scratch
    for i in range(k):
        means[i] = sums[i] / pulls[i]
    if kind == EPS_GREEDY:
        best = _argmax_random(means, k, ties, rng)
        if rng.random() < eps:
            return best
        j = _draw_index(rng, k - 1)
        return j if j < best else j + 1
    if kind == VOI_AWARE:
        _voi(means, pulls, k, scratch2)
        return _argmax_random(scratch2, k, ties, rng)
    scores = scratch2
    if kind == UCB:
        for i in range(k):
            scores[i] = means[i] + math.sqrt(c * math.log(total) / pulls[i])
    else:
        for i in range(k):
            scores[i] = means[i] + math.sqrt(c * math.sqrt(total) / pulls[i])
    return _argmax_random(scores, k, ties, rng)


@njit(cache=True)
def _recommend(pulls, sums, k):
    best_i = -1
    best = -np.inf
    for i in range(k):
        if pulls[i] > 0:
            m = sums[i] / pulls[i]
            if m > best:
                best_i = i
                best = m
    return best_i


@njit(cache=True)
def _tied_regret(pulls, sums, gaps, k):
    top = sums[_recommend(pulls, sums, k)] / pulls[_recommend(pulls, sums, k)]
    acc = 0.0
    cnt = 0
    for i in range(k):
        if pulls[i] > 0 and sums[i] / pulls[i] == top:
            acc += gaps[i]
            cnt += 1
    return acc / cnt


@njit(cache=True, nogil=True)
def run_bandit(means, gaps, kind, c, eps, checkpoints, rng):
    """Pull arms of a Bernoulli bandit up to the last checkpoint.

    Returns, per checkpoint, the tie-averaged regret and the recommended arm
    (lowest index among ties).
    """
    k = means.size
    pulls = np.zeros(k, dtype=np.int64)
    sums = np.zeros(k)
    scratch = np.empty(k)
    scratch2 = np.empty(k)
    ties = np.empty(k, dtype=np.int64)
    regrets = np.empty(checkpoints.size)
    recs = np.empty(checkpoints.size, dtype=np.int64)
    ci = 0
    total = 0
    while ci < checkpoints.size:
        arm = select_arm(pulls, sums, k, total, kind, c, eps, scratch, scratch2, ties, rng)
        r = 1.0 if rng.random() < means[arm] else 0.0
        pulls[arm] += 1
        sums[arm] += r
        total += 1
        while ci < checkpoints.size and checkpoints[ci] == total:
            regrets[ci] = _tied_regret(pulls, sums, gaps, k)
            recs[ci] = _recommend(pulls, sums, k)
            ci += 1
    return regrets, recs, pulls, sums


@njit(cache=True, nogil=True)
def run_switch_tree(
    switches, gaps, root_kind, root_c, root_eps, tree_kind, tree_c, tree_eps, checkpoints, rng
):
    """Two-level SR+CR search on a switch tree, evaluated at each checkpoint."""
    k = switches.size
    pulls = np.zeros(k, dtype=np.int64)
    sums = np.zeros(k)
    cpulls = np.zeros((k, 2), dtype=np.int64)
    csums = np.zeros((k, 2))
    ctotal = np.zeros(k, dtype=np.int64)
    scratch = np.empty(k)
    scratch2 = np.empty(k)
    ties = np.empty(k, dtype=np.int64)
    regrets = np.empty(checkpoints.size)
    recs = np.empty(checkpoints.size, dtype=np.int64)
    ci = 0
    total = 0
    while ci < checkpoints.size:
        a = select_arm(
            pulls, sums, k, total, root_kind, root_c, root_eps, scratch, scratch2, ties, rng
        )
        b = select_arm(
            cpulls[a], csums[a], 2, ctotal[a], tree_kind, tree_c, tree_eps,
            scratch, scratch2, ties, rng,
        )
        p = switches[a] if b == 0 else 1.0 - switches[a]
        r = 1.0 if rng.random() < p else 0.0
        ret = r + 0.0
        cpulls[a, b] += 1
        csums[a, b] += ret
        ctotal[a] += 1
        ret = 0.0 + ret
        pulls[a] += 1
        sums[a] += ret
        total += 1
        while ci < checkpoints.size and checkpoints[ci] == total:
            regrets[ci] = _tied_regret(pulls, sums, gaps, k)
            recs[ci] = _recommend(pulls, sums, k)
            ci += 1
    return regrets, recs, pulls, sums


# --- sailing -----------------------------------------------------------------


@njit(cache=True)
def _wind_angle(d, w):
    r = (d - w) % N_DIR
    return min(r, N_DIR - r)


@njit(cache=True)
def _admissible(x, y, wind, size, out):
    n = 0
    for d in range(N_DIR):
        nx = x + _DX[d]
        ny = y + _DY[d]
        if 0 <= nx < size and 0 <= ny < size and _wind_angle(d, wind) != 4:
            out[n] = d
            n += 1
    return n


@njit(cache=True)
def _move_cost(d, wind, tack, angle_costs, diag, tack_delay):
    cost = angle_costs[_wind_angle(d, wind)]
    if d % 2 == 1:
        cost *= diag
    r = (d - wind) % N_DIR
    if r == 0 or r == 4:
        return cost, tack
    side = 1 if r < 4 else -1
    if tack != 0 and side != tack:
        cost += tack_delay
    return cost, side


@njit(cache=True)
def _sample_wind(wind, wind_cdf, rng):
    u = rng.random()
    for w in range(N_DIR):
        if u < wind_cdf[wind, w]:
            return w
    return N_DIR - 1


@njit(cache=True)
def sailing_search(
    size, x0, y0, tack0, wind0, angle_costs, diag, tack_delay, wind_cdf, hi,
    root_kind, root_c, root_eps, tree_kind, tree_c, tree_eps, budget, cutoff, rng,
):
    """SR+CR search from one sailing state; mirrors ``mcts.search``.

    Returns the recommended direction plus the root's actions, pulls and sums.
    """
    cap = 1 + budget * cutoff
    nact = np.zeros(cap, dtype=np.int64)
    acts = np.zeros((cap, N_DIR), dtype=np.int64)
    pulls = np.zeros((cap, N_DIR), dtype=np.int64)
    sums = np.zeros((cap, N_DIR))
    totals = np.zeros(cap, dtype=np.int64)
    children = Dict.empty(key_type=types.int64, value_type=types.int64)
    n_states = size * size * 3 * N_DIR
    scratch = np.empty(N_DIR)
    scratch2 = np.empty(N_DIR)
    ties = np.empty(N_DIR, dtype=np.int64)
    path_node = np.empty(cutoff, dtype=np.int64)
    path_idx = np.empty(cutoff, dtype=np.int64)
    path_reward = np.empty(cutoff)
    gx = size - 1

    nact[0] = _admissible(x0, y0, wind0, size, acts[0])
    n_nodes = 1
    for _ in range(budget):
        node = 0
        x, y, tack, wind = x0, y0, tack0, wind0
        depth = 1
        leaf = 0.0
        while True:
            if nact[node] == 1:
                idx = 0
            elif depth == 1:
                idx = select_arm(pulls[node], sums[node], nact[node], totals[node],
                                 root_kind, root_c, root_eps, scratch, scratch2, ties, rng)
            else:
                idx = select_arm(pulls[node], sums[node], nact[node], totals[node],
                                 tree_kind, tree_c, tree_eps, scratch, scratch2, ties, rng)
            d = acts[node, idx]
            cost, tack = _move_cost(d, wind, tack, angle_costs, diag, tack_delay)
            x += _DX[d]
            y += _DY[d]
            wind = _sample_wind(wind, wind_cdf, rng)
            raw = min(max(cost, 0.0), hi)
            path_node[depth - 1] = node
            path_idx[depth - 1] = idx
            path_reward[depth - 1] = (hi - raw) / (hi - 0.0)
            terminal = x == gx and y == gx
            if terminal or depth >= cutoff:
                steps_left = max(cutoff - depth, 0)
                leaf = steps_left * ((hi - 0.0) / (hi - 0.0))
                break
            s = ((x * size + y) * 3 + tack + 1) * N_DIR + wind
            key = (node * N_DIR + idx) * n_states + s
            if key in children:
                node = children[key]
            else:
                child = n_nodes
                n_nodes += 1
                nact[child] = _admissible(x, y, wind, size, acts[child])
                children[key] = child
                node = child
            depth += 1
        ret = leaf
        for j in range(depth - 1, -1, -1):
            ret = path_reward[j] + ret
            nd = path_node[j]
            pulls[nd, path_idx[j]] += 1
            sums[nd, path_idx[j]] += ret
            totals[nd] += 1
    k0 = nact[0]
    best = _recommend(pulls[0], sums[0], k0)
    return acts[0, best], acts[0, :k0].copy(), pulls[0, :k0].copy(), sums[0, :k0].copy()


@njit(cache=True, nogil=True)
def sailing_episode(
    size, wind0, angle_costs, diag, tack_delay, wind_cdf, hi,
    root_kind, root_c, root_eps, tree_kind, tree_c, tree_eps, budget, cutoff, max_steps,
    search_rng, env_rng,
):
    """Sail from the start corner, re-planning before every move.

    Returns the accumulated raw cost and the number of moves.
    """
    x, y, tack, wind = 0, 0, 0, wind0
    gx = size - 1
    total = 0.0
    steps = 0
    while not (x == gx and y == gx) and steps < max_steps:
        d, _, _, _ = sailing_search(
            size, x, y, tack, wind, angle_costs, diag, tack_delay, wind_cdf, hi,
            root_kind, root_c, root_eps, tree_kind, tree_c, tree_eps, budget, cutoff,
            search_rng,
        )
        cost, tack = _move_cost(d, wind, tack, angle_costs, diag, tack_delay)
        x += _DX[d]
        y += _DY[d]
        wind = _sample_wind(wind, wind_cdf, env_rng)
        total += cost
        steps += 1
    return total, steps
