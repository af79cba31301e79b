"""Seeded, paired experiment runner for the four experiment families.

Every repetition draws one environment instance; every policy configuration
then runs on that same instance with its own derived random stream. Per
(policy, budget) the realized regrets are reduced to mean (with standard
error), median and min.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .bandit import KIND_CODES, PolicyKind, PolicySpec
from .envs import (
    BernoulliBandit,
    Instance,
    SailingConfig,
    SailingInstance,
    SailingTables,
    SwitchTree,
    ValueTable,
    gen_bernoulli,
    gen_sailing,
    gen_switch_tree,
    instance_to_line,
    value_iteration,
)

log = logging.getLogger(__name__)

STATISTICS = ("mean", "median", "min")
CSV_HEADER = ("family", "policy", "c", "n", "statistic", "value", "stderr", "repetitions", "seed")


class Family(str, enum.Enum):
    MAB = "mab"
    TREE = "tree"
    SAILING = "sailing"
    VOI_TREE = "voi-tree"

    @property
    def is_tree(self) -> bool:
        return self in (Family.TREE, Family.VOI_TREE)


@dataclass(frozen=True)
class ExperimentSpec:
    family: Family
    policies: tuple[PolicySpec, ...]
    budgets: tuple[int, ...]
    repetitions: int
    seed: int = 0
    arms: int = 32
    size: int = 6
    # exploration factor of the UCB tree policy; None means "same c as the root"
    tree_c: float | None = None
    c_values: tuple[float, ...] | None = None
    depth_cutoff: int | None = None
    max_steps: int | None = None
    frozen_wind: bool = False
    instances: tuple[Instance, ...] | None = None
    threads: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not self.policies:
            raise ValueError("at least one policy is required")
        if not self.budgets or any(b < 1 for b in self.budgets):
            raise ValueError("budgets must be positive")
        if any(b >= a for b, a in zip(self.budgets, self.budgets[1:])):
            raise ValueError("budgets must be strictly ascending")
        if self.c_values is not None and not self.c_values:
            raise ValueError("c sweep must not be empty")

    @property
    def cutoff(self) -> int:
        if self.depth_cutoff is not None:
            return self.depth_cutoff
        return 3 * self.size if self.family is Family.SAILING else 2 if self.family.is_tree else 1

    @property
    def step_cap(self) -> int:
        return self.max_steps if self.max_steps is not None else 10 * self.size

    @property
    def sailing_config(self) -> SailingConfig:
        return SailingConfig.frozen_wind() if self.frozen_wind else SailingConfig()


@dataclass(frozen=True)
class RegretPoint:
    family: str
    policy: str
    c: float | None
    n: int
    statistic: str
    value: float
    stderr: float | None
    repetitions: int
    seed: int
    raw_cost: float | None = None


@dataclass(frozen=True)
class Config:
    """One policy configuration as run: root policy plus, for trees, the UCB tree policy."""

    root: PolicySpec
    tree: PolicySpec | None

    @property
    def label(self) -> str:
        if self.tree is None:
            return self.root.label
        if self.root == self.tree:
            return f"uct:{self.tree.c:g}"
        return f"{self.root.label}+uct:{self.tree.c:g}"

    @property
    def c(self) -> float | None:
        if self.tree is not None:
            return self.tree.c
        return self.root.c if self.root.uses_c else None


def configurations(spec: ExperimentSpec) -> list[Config]:
    out = []
    for p in spec.policies:
        if spec.family is Family.MAB:
            out.append(Config(p, None))
            continue
        c = spec.tree_c if spec.tree_c is not None else (p.c if p.uses_c else 2.0)
        out.append(Config(p, PolicySpec(PolicyKind.UCB, c=c)))
    return out


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def make_instance(spec: ExperimentSpec, rep: int) -> Instance:
    """Instance for repetition ``rep``; depends only on (seed, rep)."""
    if spec.instances:
        return spec.instances[rep % len(spec.instances)]
    rng = _stream(spec.seed, rep, 0)
    if spec.family is Family.MAB:
        return gen_bernoulli(spec.arms, rng)
    if spec.family.is_tree:
        return gen_switch_tree(spec.arms, rng)
    return gen_sailing(spec.size, rng)


def instance_hash(instance: Instance) -> str:
    return hashlib.sha256(instance_to_line(instance).encode()).hexdigest()[:16]


@lru_cache(maxsize=8)
def _optimal_values(size: int, config: SailingConfig) -> ValueTable:
    return value_iteration(SailingTables(size, config))


def _kind(p: PolicySpec) -> tuple[int, float, float]:
    return KIND_CODES[p.kind], float(p.c), float(p.epsilon)


def _run_one(
    spec: ExperimentSpec, cfg: Config, index: int, instance: Instance, rep: int
) -> tuple[np.ndarray, np.ndarray | None]:
    """Regrets (and, for sailing, raw costs) of one configuration at every budget."""
    checkpoints = np.asarray(spec.budgets, dtype=np.int64)
    rng = _stream(spec.seed, rep, index + 1)
    if isinstance(instance, BernoulliBandit):
        if spec.family is not Family.MAB:
            raise ValueError(f"a Bernoulli instance cannot run in the {spec.family.value} family")
        regrets, *_ = kernels.run_bandit(
            np.asarray(instance.means), np.asarray(instance.truth.gaps),
            *_kind(cfg.root), checkpoints, rng,
        )
        return regrets, None
    if isinstance(instance, SwitchTree):
        if not spec.family.is_tree:
            raise ValueError(f"a switch tree cannot run in the {spec.family.value} family")
        regrets, *_ = kernels.run_switch_tree(
            np.asarray(instance.switches), np.asarray(instance.truth.gaps),
            *_kind(cfg.root), *_kind(cfg.tree), checkpoints, rng,
        )
        return regrets, None
    if isinstance(instance, SailingInstance):
        if spec.family is not Family.SAILING:
            raise ValueError(f"a sailing instance cannot run in the {spec.family.value} family")
        return _run_sailing(spec, cfg, index, instance, rep)
    raise TypeError(f"unsupported instance {type(instance).__name__}")


def _run_sailing(spec, cfg, index, instance: SailingInstance, rep: int):
    config = spec.sailing_config
    optimum = _optimal_values(instance.size, config).start_value(instance)
    cdf = np.cumsum(config.wind_matrix, axis=1)
    costs = np.empty(len(spec.budgets))
    for bi, budget in enumerate(spec.budgets):
        # the same wind sequence for every policy and budget of this repetition
        env_rng = _stream(spec.seed, rep, 0, 1)
        search_rng = _stream(spec.seed, rep, index + 1, bi)
        costs[bi], _ = kernels.sailing_episode(
            instance.size, instance.initial_wind,
            np.asarray(config.angle_costs), config.diagonal_factor, config.tack_delay,
            cdf, config.max_step_cost,
            *_kind(cfg.root), *_kind(cfg.tree),
            budget, spec.cutoff, spec.step_cap, search_rng, env_rng,
        )
    return costs - optimum, costs


InstanceHook = Callable[[int, str, Instance], None]


def run(spec: ExperimentSpec, on_instance: InstanceHook | None = None) -> list[RegretPoint]:
    """Run every configuration on every repetition and aggregate per budget."""
    configs = configurations(spec)
    n_b = len(spec.budgets)
    regrets = np.empty((len(configs), spec.repetitions, n_b))
    costs = np.empty_like(regrets) if spec.family is Family.SAILING else None

    def one_rep(rep: int) -> None:
        instance = make_instance(spec, rep)
        for i, cfg in enumerate(configs):
            if on_instance is not None:
                on_instance(rep, cfg.label, instance)
            try:
                r, cost = _run_one(spec, cfg, i, instance, rep)
            except Exception as exc:
                raise RuntimeError(f"repetition {rep}, policy {cfg.label}: {exc}") from exc
            regrets[i, rep] = r
            if costs is not None:
                costs[i, rep] = cost

    log.info("running %s: %d configs x %d reps", spec.family.value, len(configs), spec.repetitions)
    if spec.threads > 1 and on_instance is None:
        with ThreadPoolExecutor(spec.threads) as pool:
            list(pool.map(one_rep, range(spec.repetitions)))
    else:
        for rep in range(spec.repetitions):
            one_rep(rep)

    points = []
    for i, cfg in enumerate(configs):
        for bi, n in enumerate(spec.budgets):
            stats = aggregate(regrets[i, :, bi])
            raw = aggregate(costs[i, :, bi]) if costs is not None else None
            for name in STATISTICS:
                value, se = stats[name]
                points.append(
                    RegretPoint(
                        family=spec.family.value,
                        policy=cfg.label,
                        c=cfg.c,
                        n=int(n),
                        statistic=name,
                        value=value,
                        stderr=se,
                        repetitions=spec.repetitions,
                        seed=spec.seed,
                        raw_cost=raw[name][0] if raw is not None else None,
                    )
                )
    return points


def aggregate(values: np.ndarray) -> dict[str, tuple[float, float | None]]:
    """Mean with standard error (sample sd / sqrt(count)), median and min."""
    values = np.asarray(values, dtype=float)
    n = values.size
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return {
        "mean": (float(np.mean(values)), se),
        "median": (float(np.median(values)), None),
        "min": (float(np.min(values)), None),
    }


def sweep_exploration(
    spec: ExperimentSpec, c_values: Sequence[float] | None = None
) -> dict[float, list[RegretPoint]]:
    """Re-run ``spec`` for each exploration factor.

    The factor replaces ``c`` of c-consuming root policies and of the UCB tree
    policy. Bandit policies that ignore ``c`` are run once, under the first
    factor.
    """
    grid = tuple(c_values if c_values is not None else spec.c_values or ())
    if not grid:
        raise ValueError("c sweep must not be empty")
    out: dict[float, list[RegretPoint]] = {}
    for j, c in enumerate(grid):
        policies = tuple(
            p.with_c(c)
            for p in spec.policies
            if p.uses_c or spec.family is not Family.MAB or j == 0
        )
        if not policies:
            out[c] = []
            continue
        sub = replace(spec, policies=policies, tree_c=c, c_values=None)
        out[c] = run(sub)
    return out


def sensitivity(points: Iterable[RegretPoint], statistic: str = "mean", raw: bool = False):
    """Per (policy kind, n): median over c minus min over c of the chosen statistic."""
    groups: dict[tuple[str, int], list[float]] = {}
    for p in points:
        if p.statistic != statistic:
            continue
        value = p.raw_cost if raw else p.value
        groups.setdefault((policy_family(p.policy), p.n), []).append(value)
    return {key: float(np.median(v) - np.min(v)) for key, v in groups.items()}


def policy_family(label: str) -> str:
    """Strip exploration factors from a label: ``ucbsqrt:2+uct:2`` -> ``ucbsqrt+uct``."""
    parts = []
    for part in label.split("+"):
        name, _, param = part.partition(":")
        parts.append(part if name == "eps" else name)
    return "+".join(parts)


def _fmt(x: float | int | None) -> str:
    if x is None:
        return ""
    return f"{x:.9g}"


def _sort_key(p: RegretPoint):
    return (p.policy, -math.inf if p.c is None else p.c, p.n, p.statistic)


def format_csv(points: Iterable[RegretPoint]) -> str:
    points = sorted(points, key=_sort_key)
    with_cost = any(p.raw_cost is not None for p in points) or any(
        p.family == Family.SAILING.value for p in points
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER + (("raw_cost",) if with_cost else ()))
    for p in points:
        row = [
            p.family, p.policy, _fmt(p.c), str(p.n), p.statistic, _fmt(p.value),
            _fmt(p.stderr), str(p.repetitions), str(p.seed),
        ]
        if with_cost:
            row.append(_fmt(p.raw_cost))
        writer.writerow(row)
    return buf.getvalue()


def write_csv(points: Iterable[RegretPoint], destination: str | Path) -> None:
    Path(destination).write_text(format_csv(points), encoding="utf-8", newline="")


def best_at_largest_budget(points: Sequence[RegretPoint]) -> RegretPoint | None:
    means = [p for p in points if p.statistic == "mean"]
    if not means:
        return None
    top = max(p.n for p in means)
    return min((p for p in means if p.n == top), key=lambda p: (p.value, p.policy))


def log_budgets(lo: int, hi: int, count: int) -> tuple[int, ...]:
    """``count`` log-spaced integer budgets from ``lo`` to ``hi``, deduplicated."""
    if not 1 <= lo <= hi or count < 1:
        raise ValueError(f"bad budget range {lo}:{hi}:log{count}")
    if count == 1:
        return (hi,)
    grid = np.geomspace(lo, hi, count)
    return tuple(sorted({int(round(v)) for v in grid}))


def parse_budgets(text: str) -> tuple[int, ...]:
    """``lo:hi:logN`` or a comma-separated list of integers."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3 or not parts[2].startswith("log"):
            raise ValueError(f"budget range must look like lo:hi:logN, got {text!r}")
        return log_budgets(int(parts[0]), int(parts[1]), int(parts[2][3:]))
    values = tuple(int(v) for v in text.split(",") if v.strip())
    if not values:
        raise ValueError("empty budget list")
    return values


def c_grid(lo: float = 0.02, hi: float = 20.0, count: int = 11) -> tuple[float, ...]:
    return tuple(float(f"{v:.6g}") for v in np.geomspace(lo, hi, count))


@dataclass(frozen=True)
class Preset:
    family: Family
    values: dict[str, str] = field(default_factory=dict)


PRESETS: dict[str, Preset] = {
    "paper-fig1b": Preset(Family.MAB, {
        "arms": "32", "reps": "10000", "budgets": "10:10000:log25",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2,uniform",
    }),
    "paper-fig2b": Preset(Family.TREE, {
        "arms": "16", "reps": "10000", "budgets": "10:10000:log25",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2",
    }),
    "paper-fig2c": Preset(Family.TREE, {
        "arms": "64", "reps": "10000", "budgets": "10:10000:log25",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2",
    }),
    "paper-fig3": Preset(Family.SAILING, {
        "size": "6", "reps": "500", "budgets": "10,16,25,40,63,100,158,251,397,631,1000,1585",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2", "c-grid": "0.02:20:11",
    }),
    "paper-fig4a": Preset(Family.SAILING, {
        "size": "6", "reps": "500", "budgets": "397",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2", "c-grid": "0.02:20:11",
    }),
    "paper-fig4b": Preset(Family.SAILING, {
        "size": "6", "reps": "500", "budgets": "1585",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2", "c-grid": "0.02:20:11",
    }),
    "paper-fig5b": Preset(Family.SAILING, {
        "size": "10", "reps": "500", "budgets": "397",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2", "c-grid": "0.02:20:11",
    }),
    "paper-fig7": Preset(Family.VOI_TREE, {
        "arms": "32", "reps": "10000", "budgets": "10:10000:log25",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2,voi",
    }),
}
