"""Two-stage (SR+CR) Monte-Carlo tree search over a generative MDP model.

The first step of every rollout is chosen by the root policy (normally a
simple-regret scheme); the remaining steps use the tree policy (normally UCB).
With both set to ``UCB(c)`` the engine is plain UCT.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Hashable, Protocol, Sequence

import numpy as np

from .bandit import BanditView, PolicyKind, PolicySpec, recommend, select

State = Hashable
Action = Hashable


class MdpModel(Protocol):
    def initial_state(self) -> State: ...

    def actions(self, state: State) -> Sequence[Action]: ...

    def sample_transition(
        self, state: State, action: Action, rng: np.random.Generator
    ) -> tuple[State, float]: ...

    def is_terminal(self, state: State) -> bool: ...


class TransformKind(str, enum.Enum):
    IDENTITY = "identity"
    NEGATE_AND_SCALE = "negate_and_scale"


@dataclass(frozen=True)
class RewardTransform:
    kind: TransformKind = TransformKind.IDENTITY
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self) -> None:
        if self.kind is TransformKind.NEGATE_AND_SCALE and not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got lo={self.lo}, hi={self.hi}")

    @classmethod
    def negate_and_scale(cls, lo: float, hi: float) -> RewardTransform:
        return cls(TransformKind.NEGATE_AND_SCALE, lo, hi)

    @property
    def idle_value(self) -> float:
        """Transformed value of a step that incurs no raw reward or cost."""
        return transform_reward(0.0, self)


IDENTITY = RewardTransform()


def transform_reward(raw: float, transform: RewardTransform) -> float:
    if transform.kind is TransformKind.IDENTITY:
        if not 0.0 <= raw <= 1.0:
            raise ValueError(f"identity transform needs a reward in [0, 1], got {raw}")
        return raw
    lo, hi = transform.lo, transform.hi
    raw = min(max(raw, lo), hi)
    return (hi - raw) / (hi - lo)


@dataclass(frozen=True)
class SearchParams:
    root_policy: PolicySpec
    tree_policy: PolicySpec = field(default_factory=lambda: PolicySpec(PolicyKind.UCB, c=2.0))
    depth_cutoff: int = 1
    budget: int = 100
    reward_transform: RewardTransform = IDENTITY

    def __post_init__(self) -> None:
        if self.depth_cutoff < 1:
            raise ValueError("depth_cutoff must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")

    @classmethod
    def uct(cls, c: float = 2.0, **kwargs: Any) -> SearchParams:
        ucb = PolicySpec(PolicyKind.UCB, c=c)
        return cls(root_policy=ucb, tree_policy=ucb, **kwargs)


class SearchNode:
    """Per-state statistics: one arm per admissible action, plus chance children."""

    __slots__ = ("actions", "stats", "children")

    def __init__(self, actions: Sequence[Action]):
        if not actions:
            raise ValueError("a non-terminal state must have at least one action")
        self.actions = list(actions)
        self.stats = BanditView.empty(len(self.actions))
        self.children: dict[tuple[int, State], SearchNode] = {}

    @property
    def visits(self) -> int:
        return self.stats.total_pulls

    def action_stats(self, action: Action):
        return self.stats.arms[self.actions.index(action)]

    def child(self, action: Action, state: State) -> SearchNode | None:
        return self.children.get((self.actions.index(action), state))

    def walk(self):
        yield self
        for node in self.children.values():
            yield from node.walk()


def _choose(node: SearchNode, policy: PolicySpec, rng: np.random.Generator) -> int:
    if len(node.actions) == 1:
        return 0
    return select(node.stats, policy, rng)


def rollout(
    model: MdpModel,
    node: SearchNode,
    state: State,
    depth: int,
    params: SearchParams,
    rng: np.random.Generator,
) -> float:
    """One rollout from ``state``; returns the transformed return from this node down.

    A terminal state contributes the idle value for each step left before the
    cutoff (zero under the identity transform), so that cost domains do not
    reward longer trajectories.
    """
    if depth > params.depth_cutoff or model.is_terminal(state):
        return _leaf_value(depth, params)

    policy = params.root_policy if depth == 1 else params.tree_policy
    idx = _choose(node, policy, rng)
    action = node.actions[idx]
    next_state, raw = model.sample_transition(state, action, rng)
    reward = transform_reward(raw, params.reward_transform)

    key = (idx, next_state)
    child = node.children.get(key)
    if child is None and depth < params.depth_cutoff and not model.is_terminal(next_state):
        child = node.children[key] = SearchNode(model.actions(next_state))
    ret = reward + (
        rollout(model, child, next_state, depth + 1, params, rng)
        if child is not None
        else _leaf_value(depth + 1, params)
    )
    node.stats.add(idx, ret)
    return ret


def _leaf_value(depth: int, params: SearchParams) -> float:
    steps_left = max(params.depth_cutoff - depth + 1, 0)
    return steps_left * params.reward_transform.idle_value


def search(
    model: MdpModel,
    params: SearchParams,
    rng: np.random.Generator,
    state: State | None = None,
) -> tuple[Action, SearchNode]:
    """Run ``params.budget`` rollouts from ``state`` (default: the initial state).

    Returns the recommended action (greatest sample mean, lowest index on
    ties) and the root node.
    """
    if state is None:
        state = model.initial_state()
    if model.is_terminal(state):
        raise ValueError("cannot search from a terminal state")
    root = SearchNode(model.actions(state))
    if params.budget < len(root.actions):
        raise ValueError(
            f"budget {params.budget} is smaller than the {len(root.actions)} root actions"
        )
    for _ in range(params.budget):
        rollout(model, root, state, 1, params, rng)
    return root.actions[recommend(root.stats)], root


def play_episode(
    model: MdpModel,
    params: SearchParams,
    search_rng: np.random.Generator,
    env_rng: np.random.Generator,
    max_steps: int,
) -> tuple[float, int]:
    """Act in ``model`` by re-planning from scratch before every move.

    Real transitions draw from ``env_rng``, searches from ``search_rng``.
    Returns the summed raw transition values (costs in cost domains) and the
    number of moves taken.
    """
    state = model.initial_state()
    total = 0.0
    steps = 0
    while not model.is_terminal(state) and steps < max_steps:
        action, _ = search(model, params, search_rng, state)
        state, raw = model.sample_transition(state, action, env_rng)
        total += raw
        steps += 1
    return total, steps
