"""Arm statistics, flat-set sampling policies and the simple-regret measure.

Every random decision draws from ``rng.random()`` only (a NumPy ``Generator``),
so the compiled kernels in :mod:`simple_regret.kernels` can replay exactly the
same stream and produce bit-identical traces.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class PolicyKind(str, enum.Enum):
    UCB = "ucb"
    UCB_SQRT = "ucbsqrt"
    EPS_GREEDY = "eps"
    UNIFORM = "uniform"
    VOI_AWARE = "voi"


# integer codes shared with the compiled kernels
KIND_CODES = {
    PolicyKind.UCB: 0,
    PolicyKind.UCB_SQRT: 1,
    PolicyKind.EPS_GREEDY: 2,
    PolicyKind.UNIFORM: 3,
    PolicyKind.VOI_AWARE: 4,
}


@dataclass(frozen=True)
class PolicySpec:
    """Selection rule plus its parameters.

    ``c`` is read by UCB and UCB_SQRT, ``epsilon`` by EPS_GREEDY; the other
    field is ignored for those kinds.
    """

    kind: PolicyKind
    c: float = 2.0
    epsilon: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if self.kind in (PolicyKind.UCB, PolicyKind.UCB_SQRT) and not self.c > 0:
            raise ValueError(f"{self.kind.value} needs c > 0, got {self.c}")
        if self.kind is PolicyKind.EPS_GREEDY and not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    @property
    def uses_c(self) -> bool:
        return self.kind in (PolicyKind.UCB, PolicyKind.UCB_SQRT)

    @property
    def label(self) -> str:
        if self.uses_c:
            return f"{self.kind.value}:{self.c:g}"
        if self.kind is PolicyKind.EPS_GREEDY:
            return f"eps:{self.epsilon:g}"
        return self.kind.value

    @classmethod
    def parse(cls, text: str) -> PolicySpec:
        """Parse ``kind[:param]``, e.g. ``ucb:2``, ``eps:0.5``, ``voi``."""
        name, _, param = text.strip().partition(":")
        try:
            kind = PolicyKind(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown policy kind {name!r}") from None
        if kind in (PolicyKind.UCB, PolicyKind.UCB_SQRT):
            return cls(kind, c=float(param) if param else 2.0)
        if kind is PolicyKind.EPS_GREEDY:
            return cls(kind, epsilon=float(param) if param else 0.5)
        if param:
            raise ValueError(f"policy {name!r} takes no parameter")
        return cls(kind)

    def with_c(self, c: float) -> PolicySpec:
        return PolicySpec(self.kind, c=c, epsilon=self.epsilon) if self.uses_c else self


@dataclass(slots=True)
class ArmStats:
    pulls: int = 0
    reward_sum: float = 0.0

    @property
    def mean(self) -> float:
        """Sample mean; NaN for an arm that was never pulled."""
        return self.reward_sum / self.pulls if self.pulls else math.nan


@dataclass(slots=True)
class BanditView:
    arms: list[ArmStats]
    total_pulls: int = 0

    @classmethod
    def empty(cls, k: int) -> BanditView:
        return cls([ArmStats() for _ in range(k)])

    @classmethod
    def from_counts(cls, pulls: Sequence[int], sums: Sequence[float]) -> BanditView:
        arms = [ArmStats(int(p), float(s)) for p, s in zip(pulls, sums)]
        return cls(arms, sum(a.pulls for a in arms))

    def __len__(self) -> int:
        return len(self.arms)

    @property
    def pulls(self) -> list[int]:
        return [a.pulls for a in self.arms]

    @property
    def means(self) -> list[float]:
        return [a.mean for a in self.arms]

    def add(self, arm: int, value: float) -> None:
        """Unchecked update; multi-step search returns are not confined to [0, 1]."""
        stats = self.arms[arm]
        stats.pulls += 1
        stats.reward_sum += value
        self.total_pulls += 1


@dataclass(frozen=True)
class TrueArms:
    means: tuple[float, ...]
    best_mean: float = field(init=False)
    gaps: tuple[float, ...] = field(init=False)

    def __post_init__(self) -> None:
        means = tuple(float(m) for m in self.means)
        if not means:
            raise ValueError("TrueArms needs at least one arm")
        best = max(means)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "best_mean", best)
        object.__setattr__(self, "gaps", tuple(best - m for m in means))

    @classmethod
    def from_gaps(cls, gaps: Sequence[float]) -> TrueArms:
        """Arms whose means are ``1 - gap`` (only the gaps matter to the bounds)."""
        if min(gaps) != 0:
            raise ValueError("at least one gap must be exactly 0")
        return cls(tuple(1.0 - g for g in gaps))

    @property
    def k(self) -> int:
        return len(self.means)


def record_reward(view: BanditView, arm: int, reward: float) -> BanditView:
    """Record one pull of ``arm``; updates ``view`` in place and returns it."""
    if not 0 <= arm < len(view.arms):
        raise IndexError(f"arm {arm} out of range for {len(view.arms)} arms")
    if not 0.0 <= reward <= 1.0:
        raise ValueError(f"reward {reward} outside [0, 1]")
    view.add(arm, reward)
    return view


def ucb_score(mean: float, n_i: int, n: int, c: float) -> float:
    if n_i < 1:
        raise ValueError("ucb_score is undefined for an unpulled arm")
    return mean + math.sqrt(c * math.log(n) / n_i)


def ucb_sqrt_score(mean: float, n_i: int, n: int, c: float) -> float:
    if n_i < 1:
        raise ValueError("ucb_sqrt_score is undefined for an unpulled arm")
    return mean + math.sqrt(c * math.sqrt(n) / n_i)


def _draw_index(rng: np.random.Generator, m: int) -> int:
    return min(int(rng.random() * m), m - 1)


def _argmax_random(values: Sequence[float], rng: np.random.Generator) -> int:
    best = max(values)
    ties = [i for i, v in enumerate(values) if v == best]
    if len(ties) == 1:
        return ties[0]
    return ties[_draw_index(rng, len(ties))]


def _argmax_first(values: Sequence[float], skip: int = -1) -> int:
    best_i = -1
    for i, v in enumerate(values):
        if i != skip and (best_i < 0 or v > values[best_i]):
            best_i = i
    return best_i


def voi_from_stats(means: Sequence[float], pulls: Sequence[int]) -> list[float]:
    """Value-of-information estimates from raw means and counts.

    Does not require every arm to be pulled, so the formula can be evaluated at
    ``n = 0`` directly.
    """
    if len(means) < 2:
        raise ValueError("VOI estimates need at least two arms")
    alpha = _argmax_first(means)
    beta = _argmax_first(means, skip=alpha)
    top = means[alpha]
    out = []
    for i, (m, n) in enumerate(zip(means, pulls)):
        if i == alpha:
            second = means[beta]
            d = top - second
            out.append(second / (n + 1) * math.exp(-2.0 * (d * d) * n))
        else:
            d = top - m
            out.append((1.0 - top) / (n + 1) * math.exp(-2.0 * (d * d) * n))
    return out


def voi_estimates(view: BanditView) -> list[float]:
    if len(view.arms) < 2:
        raise ValueError("VOI estimates need at least two arms")
    if any(a.pulls == 0 for a in view.arms):
        raise ValueError("VOI estimates need every arm pulled at least once")
    return voi_from_stats(view.means, view.pulls)


def select(view: BanditView, spec: PolicySpec, rng: np.random.Generator) -> int:
    """Choose the next arm to pull.

    Unpulled arms are forced first (lowest index). Ties among maximizers are
    broken uniformly at random.
    """
    k = len(view.arms)
    if k < 2:
        raise ValueError("selection needs at least two arms")
    for i, a in enumerate(view.arms):
        if a.pulls == 0:
            return i

    kind = spec.kind
    if kind is PolicyKind.UNIFORM:
        return _draw_index(rng, k)
    if kind is PolicyKind.EPS_GREEDY:
        best = _argmax_random(view.means, rng)
        if rng.random() < spec.epsilon:
            return best
        j = _draw_index(rng, k - 1)
        return j if j < best else j + 1
    if kind is PolicyKind.VOI_AWARE:
        return _argmax_random(voi_estimates(view), rng)

    score = ucb_score if kind is PolicyKind.UCB else ucb_sqrt_score
    n = view.total_pulls
    return _argmax_random([score(a.mean, a.pulls, n, spec.c) for a in view.arms], rng)


def recommend(view: BanditView) -> int:
    """Arm with the greatest sample mean among pulled arms (lowest index on ties)."""
    best_i = -1
    best = -math.inf
    for i, a in enumerate(view.arms):
        if a.pulls and a.mean > best:
            best_i, best = i, a.mean
    if best_i < 0:
        raise ValueError("no arm has been pulled")
    return best_i


def tied_best(view: BanditView) -> list[int]:
    """All pulled arms whose sample mean equals the maximum."""
    top = view.arms[recommend(view)].mean
    return [i for i, a in enumerate(view.arms) if a.pulls and a.mean == top]


def realized_regret(truth: TrueArms, j: int) -> float:
    if not 0 <= j < truth.k:
        raise IndexError(f"arm {j} out of range for {truth.k} arms")
    return truth.gaps[j]


def recommendation_regret(truth: TrueArms, view: BanditView) -> float:
    """Regret of the recommendation, averaged over ties.

    This is the expectation of :func:`realized_regret` under a uniformly
    random choice among the tied maximizers.
    """
    ties = tied_best(view)
    return sum(truth.gaps[j] for j in ties) / len(ties)
