"""Bernoulli arm sets and deceptive two-level switch trees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bandit import TrueArms

ROOT = 0
TERMINAL = -1


@dataclass(frozen=True)
class BernoulliBandit:
    means: tuple[float, ...]

    def __post_init__(self) -> None:
        means = tuple(float(m) for m in self.means)
        if len(means) < 2:
            raise ValueError("a bandit needs at least two arms")
        if any(not 0.0 <= m <= 1.0 for m in means):
            raise ValueError("Bernoulli means must lie in [0, 1]")
        object.__setattr__(self, "means", means)

    @property
    def k(self) -> int:
        return len(self.means)

    @property
    def truth(self) -> TrueArms:
        return TrueArms(self.means)


@dataclass(frozen=True)
class SwitchTree:
    """Root arms each leading to a switch node over leaves with means ``p`` and ``1 - p``.

    A uniform average over a switch node's leaves is always 0.5, while its
    true (max) value is ``max(p, 1 - p)``.
    """

    switches: tuple[float, ...]

    def __post_init__(self) -> None:
        switches = tuple(float(p) for p in self.switches)
        if len(switches) < 2:
            raise ValueError("a switch tree needs at least two root arms")
        if any(not 0.0 <= p <= 1.0 for p in switches):
            raise ValueError("switch parameters must lie in [0, 1]")
        object.__setattr__(self, "switches", switches)

    @property
    def k(self) -> int:
        return len(self.switches)

    def leaf_means(self, arm: int) -> tuple[float, float]:
        p = self.switches[arm]
        return p, 1.0 - p

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(max(p, 1.0 - p) for p in self.switches)

    @property
    def truth(self) -> TrueArms:
        return TrueArms(self.values)


def gen_bernoulli(k: int, rng: np.random.Generator) -> BernoulliBandit:
    if k < 2:
        raise ValueError("K must be at least 2")
    return BernoulliBandit(tuple(rng.random(k)))


def gen_switch_tree(k: int, rng: np.random.Generator) -> SwitchTree:
    if k < 2:
        raise ValueError("K must be at least 2")
    return SwitchTree(tuple(rng.random(k)))


def _bernoulli(p: float, rng: np.random.Generator) -> float:
    return 1.0 if rng.random() < p else 0.0


class BanditMdp:
    """One-step MDP: pick an arm, observe a Bernoulli reward, stop."""

    def __init__(self, bandit: BernoulliBandit):
        self.bandit = bandit

    def initial_state(self) -> int:
        return ROOT

    def actions(self, state: int) -> list[int]:
        return list(range(self.bandit.k)) if state == ROOT else []

    def is_terminal(self, state: int) -> bool:
        return state == TERMINAL

    def sample_transition(self, state: int, action: int, rng: np.random.Generator):
        return TERMINAL, _bernoulli(self.bandit.means[action], rng)

    def true_values(self) -> tuple[float, ...]:
        return self.bandit.means


class SwitchTreeMdp:
    """Max-max tree: pick a root arm (no reward), then a leaf (Bernoulli reward).

    States: ``0`` is the root, ``i + 1`` the switch node under arm ``i``,
    ``-1`` terminal.
    """

    def __init__(self, tree: SwitchTree):
        self.tree = tree

    def initial_state(self) -> int:
        return ROOT

    def actions(self, state: int) -> list[int]:
        if state == ROOT:
            return list(range(self.tree.k))
        if state == TERMINAL:
            return []
        return [0, 1]

    def is_terminal(self, state: int) -> bool:
        return state == TERMINAL

    def sample_transition(self, state: int, action: int, rng: np.random.Generator):
        if state == ROOT:
            return action + 1, 0.0
        p = self.tree.leaf_means(state - 1)[action]
        return TERMINAL, _bernoulli(p, rng)

    def true_values(self) -> tuple[float, ...]:
        return self.tree.values


def as_mdp(instance: BernoulliBandit | SwitchTree) -> BanditMdp | SwitchTreeMdp:
    if isinstance(instance, BernoulliBandit):
        return BanditMdp(instance)
    if isinstance(instance, SwitchTree):
        return SwitchTreeMdp(instance)
    raise TypeError(f"no MDP adapter for {type(instance).__name__}")
