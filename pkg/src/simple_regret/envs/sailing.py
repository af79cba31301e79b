"""The sailing domain: a stochastic shortest-path problem on a square lake.

The boat starts in the south-west corner and must reach the north-east
corner. Each move goes to one of the 8 neighbouring cells; its cost depends on
the angle between the move and the wind, with an extra delay whenever the boat
changes tack. The wind drifts after every move.

A state is ``(x, y, tack, wind)``. ``tack`` is the side the wind crossed on the
last move that had a crosswind (-1, +1), or 0 before any such move. ``wind``
is the direction the wind blows towards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..mcts import RewardTransform

# N, NE, E, SE, S, SW, W, NW
DIRECTIONS = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))
N_DIRECTIONS = 8
INTO_WIND = 4


@dataclass(frozen=True)
class SailingConfig:
    """All constants of the domain in one place.

    ``angle_costs[a]`` is the cost of a straight move at ``45 * a`` degrees off
    the wind direction (0 = running before the wind); moving at 180 degrees is
    forbidden.
    """

    angle_costs: tuple[float, float, float, float] = (1.0, 2.0, 3.0, 4.0)
    diagonal_factor: float = math.sqrt(2.0)
    tack_delay: float = 3.0
    wind_stay: float = 0.4
    wind_turn: float = 0.3

    def __post_init__(self) -> None:
        if any(not (c > 0 and math.isfinite(c)) for c in self.angle_costs):
            raise ValueError("angle costs must be positive and finite")
        if abs(self.wind_stay + 2 * self.wind_turn - 1.0) > 1e-12:
            raise ValueError("wind probabilities must sum to 1")

    @classmethod
    def frozen_wind(cls, **kwargs) -> SailingConfig:
        return cls(wind_stay=1.0, wind_turn=0.0, **kwargs)

    @property
    def max_step_cost(self) -> float:
        return max(self.angle_costs) * self.diagonal_factor + self.tack_delay

    @cached_property
    def wind_matrix(self) -> np.ndarray:
        """Row-stochastic 8x8 wind transition matrix."""
        m = np.zeros((N_DIRECTIONS, N_DIRECTIONS))
        for w in range(N_DIRECTIONS):
            m[w, w] += self.wind_stay
            m[w, (w + 1) % N_DIRECTIONS] += self.wind_turn
            m[w, (w - 1) % N_DIRECTIONS] += self.wind_turn
        return m


def wind_angle(direction: int, wind: int) -> int:
    d = (direction - wind) % N_DIRECTIONS
    return min(d, N_DIRECTIONS - d)


def crosswind_side(direction: int, wind: int) -> int:
    d = (direction - wind) % N_DIRECTIONS
    if d in (0, INTO_WIND):
        return 0
    return 1 if d < INTO_WIND else -1


def step_cost(direction: int, wind: int, tack: int, config: SailingConfig) -> tuple[float, int]:
    """Cost of moving in ``direction`` and the boat's tack afterwards."""
    angle = wind_angle(direction, wind)
    if angle == INTO_WIND:
        raise ValueError("cannot sail into the wind")
    cost = config.angle_costs[angle]
    if direction % 2:
        cost *= config.diagonal_factor
    side = crosswind_side(direction, wind)
    if side == 0:
        return cost, tack
    if tack != 0 and side != tack:
        cost += config.tack_delay
    return cost, side


@dataclass(frozen=True)
class SailingInstance:
    """One episode's start: lake size and initial wind."""

    size: int
    initial_wind: int

    def __post_init__(self) -> None:
        if self.size < 2:
            raise ValueError("lake size must be at least 2")
        if not 0 <= self.initial_wind < N_DIRECTIONS:
            raise ValueError("initial wind must be a direction index in [0, 8)")


def gen_sailing(size: int, rng: np.random.Generator) -> SailingInstance:
    return SailingInstance(size, min(int(rng.random() * N_DIRECTIONS), N_DIRECTIONS - 1))


class SailingMdp:
    """Generative model of the lake for the search engine.

    Raw transition rewards are step costs; pair with :attr:`reward_transform`.
    """

    def __init__(self, size: int, config: SailingConfig | None = None, initial_wind: int = 0):
        if size < 2:
            raise ValueError("lake size must be at least 2")
        self.size = size
        self.config = config or SailingConfig()
        self.initial_wind = initial_wind
        self.goal = (size - 1, size - 1)
        self._wind_cdf = np.cumsum(self.config.wind_matrix, axis=1)

    @property
    def reward_transform(self) -> RewardTransform:
        # lo = 0 so that the idle step (no further cost) maps to reward 1
        return RewardTransform.negate_and_scale(0.0, self.config.max_step_cost)

    def initial_state(self) -> tuple[int, int, int, int]:
        return (0, 0, 0, self.initial_wind)

    def is_terminal(self, state) -> bool:
        return (state[0], state[1]) == self.goal

    def actions(self, state) -> list[int]:
        if self.is_terminal(state):
            return []
        x, y, _, wind = state
        n = self.size
        return [
            d
            for d, (dx, dy) in enumerate(DIRECTIONS)
            if 0 <= x + dx < n and 0 <= y + dy < n and wind_angle(d, wind) != INTO_WIND
        ]

    def sample_wind(self, wind: int, rng: np.random.Generator) -> int:
        u = rng.random()
        row = self._wind_cdf[wind]
        for w in range(N_DIRECTIONS):
            if u < row[w]:
                return w
        return N_DIRECTIONS - 1

    def move(self, state, direction: int) -> tuple[tuple[int, int, int], float]:
        """Deterministic part of a transition: new ``(x, y, tack)`` and step cost."""
        x, y, tack, wind = state
        dx, dy = DIRECTIONS[direction]
        cost, new_tack = step_cost(direction, wind, tack, self.config)
        return (x + dx, y + dy, new_tack), cost

    def sample_transition(self, state, action: int, rng: np.random.Generator):
        (x, y, tack), cost = self.move(state, action)
        return (x, y, tack, self.sample_wind(state[3], rng)), cost


@dataclass
class SailingTables:
    """Exact transition and cost tables over every state of a lake.

    States are indexed ``((x * size + y) * 3 + tack + 1) * 8 + wind``.
    """

    size: int
    config: SailingConfig
    valid: np.ndarray = field(init=False)  # (n_states, 8) bool
    cost: np.ndarray = field(init=False)  # (n_states, 8)
    next_block: np.ndarray = field(init=False)  # (n_states, 8) index of (x', y', tack')
    goal: np.ndarray = field(init=False)  # (n_states,) bool

    def __post_init__(self) -> None:
        n = self.size
        if n < 2:
            raise ValueError("lake size must be at least 2")
        n_states = n * n * 3 * N_DIRECTIONS
        self.valid = np.zeros((n_states, N_DIRECTIONS), dtype=bool)
        self.cost = np.zeros((n_states, N_DIRECTIONS))
        self.next_block = np.zeros((n_states, N_DIRECTIONS), dtype=np.int64)
        self.goal = np.zeros(n_states, dtype=bool)
        mdp = SailingMdp(n, self.config)
        for x in range(n):
            for y in range(n):
                for tack in (-1, 0, 1):
                    for wind in range(N_DIRECTIONS):
                        s = self.index(x, y, tack, wind)
                        state = (x, y, tack, wind)
                        if mdp.is_terminal(state):
                            self.goal[s] = True
                            continue
                        for d in mdp.actions(state):
                            (nx, ny, nt), c = mdp.move(state, d)
                            self.valid[s, d] = True
                            self.cost[s, d] = c
                            self.next_block[s, d] = (nx * n + ny) * 3 + nt + 1

    @property
    def n_states(self) -> int:
        return self.goal.size

    def index(self, x: int, y: int, tack: int, wind: int) -> int:
        return ((x * self.size + y) * 3 + tack + 1) * N_DIRECTIONS + wind

    def state_of(self, index: int) -> tuple[int, int, int, int]:
        wind = index % N_DIRECTIONS
        block = index // N_DIRECTIONS
        tack = block % 3 - 1
        cell = block // 3
        return (cell // self.size, cell % self.size, tack, wind)


def sailing_mdp(
    size: int, config: SailingConfig | None = None, initial_wind: int = 0
) -> tuple[SailingMdp, SailingTables]:
    config = config or SailingConfig()
    return SailingMdp(size, config, initial_wind), SailingTables(size, config)


@dataclass
class ValueTable:
    tables: SailingTables
    values: np.ndarray
    tolerance: float
    residuals: list[float]

    def value(self, state) -> float:
        return float(self.values[self.tables.index(*state)])

    def q_values(self, state) -> np.ndarray:
        """Expected cost-to-go of each direction (inf where inadmissible)."""
        t = self.tables
        s = t.index(*state)
        expected = self.values.reshape(-1, N_DIRECTIONS) @ t.config.wind_matrix.T
        q = np.full(N_DIRECTIONS, np.inf)
        ok = t.valid[s]
        q[ok] = t.cost[s, ok] + expected[t.next_block[s, ok], state[3]]
        return q

    def start_value(self, instance: SailingInstance) -> float:
        return self.value((0, 0, 0, instance.initial_wind))


def value_iteration(
    tables: SailingTables, tolerance: float = 1e-9, max_iterations: int = 100_000
) -> ValueTable:
    """Jacobi Bellman backups on expected cost-to-go, starting from zero."""
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    wind_t = tables.config.wind_matrix.T
    values = np.zeros(tables.n_states)
    winds = np.arange(tables.n_states) % N_DIRECTIONS
    residuals: list[float] = []
    for _ in range(max_iterations):
        expected = values.reshape(-1, N_DIRECTIONS) @ wind_t  # [block, wind]
        q = tables.cost + expected[tables.next_block, winds[:, None]]
        q[~tables.valid] = np.inf
        new = q.min(axis=1)
        new[tables.goal] = 0.0
        residual = float(np.max(np.abs(new - values)))
        residuals.append(residual)
        values = new
        if residual < tolerance:
            return ValueTable(tables, values, tolerance, residuals)
    raise RuntimeError(
        f"value iteration did not converge within {max_iterations} sweeps "
        f"(last residual {residuals[-1]:.3g})"
    )
