"""Asymptotic simple-regret envelopes for epsilon-greedy, uniform and UCB-sqrt sampling.

The envelopes hold with probability at least ``1 - eta`` once the sample count
passes an unspecified threshold; ``eta`` is therefore carried for labelling only
and never enters the value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bandit import TrueArms


@dataclass(frozen=True)
class BoundParams:
    gamma: float = 1.0
    eta: float = 0.05

    def __post_init__(self) -> None:
        # gamma == 1 is admitted as the limiting envelope
        if self.gamma < 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if not 0 < self.eta < 1:
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")


def _check_n(n: float) -> None:
    if n < 0:
        raise ValueError(f"sample count must be nonnegative, got {n}")


def bound_eps_greedy(truth: TrueArms, n: float, epsilon: float, params: BoundParams) -> float:
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    _check_n(n)
    k = truth.k
    denom = (1.0 + math.sqrt((k - 1) * epsilon / (1.0 - epsilon))) ** 2
    total = sum(d * math.exp(-2.0 * d * d * n * epsilon / denom) for d in truth.gaps)
    return 2.0 * params.gamma * total


def bound_uniform(truth: TrueArms, n: float, params: BoundParams) -> float:
    _check_n(n)
    k = truth.k
    return 2.0 * params.gamma * sum(d * math.exp(-d * d * n / k) for d in truth.gaps)


def bound_ucb_sqrt(truth: TrueArms, n: float, c: float, params: BoundParams) -> float:
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    _check_n(n)
    return 2.0 * params.gamma * sum(truth.gaps) * math.exp(-c * math.sqrt(n) / 2.0)
