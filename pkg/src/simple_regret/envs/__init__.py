"""Experiment domains and a line-oriented instance format for bit-exact replay.

One instance per line, whitespace separated::

    bernoulli <K> <mean_1> ... <mean_K>
    switch <K> <p_1> ... <p_K>
    sailing <size> <initial_wind>

Floats are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Union

from .bandits import (
    BanditMdp,
    BernoulliBandit,
    SwitchTree,
    SwitchTreeMdp,
    as_mdp,
    gen_bernoulli,
    gen_switch_tree,
)
from .sailing import (
    SailingConfig,
    SailingInstance,
    SailingMdp,
    SailingTables,
    ValueTable,
    gen_sailing,
    sailing_mdp,
    value_iteration,
)

Instance = Union[BernoulliBandit, SwitchTree, SailingInstance]

__all__ = [
    "BanditMdp",
    "BernoulliBandit",
    "Instance",
    "SailingConfig",
    "SailingInstance",
    "SailingMdp",
    "SailingTables",
    "SwitchTree",
    "SwitchTreeMdp",
    "ValueTable",
    "as_mdp",
    "dump_instances",
    "gen_bernoulli",
    "gen_sailing",
    "gen_switch_tree",
    "instance_from_line",
    "instance_to_line",
    "load_instances",
    "sailing_mdp",
    "value_iteration",
]


def instance_to_line(instance: Instance) -> str:
    if isinstance(instance, BernoulliBandit):
        return " ".join(["bernoulli", str(instance.k), *map(repr, instance.means)])
    if isinstance(instance, SwitchTree):
        return " ".join(["switch", str(instance.k), *map(repr, instance.switches)])
    if isinstance(instance, SailingInstance):
        return f"sailing {instance.size} {instance.initial_wind}"
    raise TypeError(f"cannot serialize {type(instance).__name__}")


def instance_from_line(line: str) -> Instance:
    parts = line.split()
    if len(parts) < 2:
        raise ValueError(f"malformed instance line: {line!r}")
    kind, count, params = parts[0], int(parts[1]), parts[2:]
    if kind == "sailing":
        if len(params) != 1:
            raise ValueError(f"sailing line needs exactly one wind value: {line!r}")
        return SailingInstance(count, int(params[0]))
    if len(params) != count:
        raise ValueError(f"expected {count} parameters, found {len(params)}: {line!r}")
    values = tuple(float(p) for p in params)
    if kind == "bernoulli":
        return BernoulliBandit(values)
    if kind == "switch":
        return SwitchTree(values)
    raise ValueError(f"unknown instance kind {kind!r}")


def dump_instances(path: str | Path, instances: Iterable[Instance]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for inst in instances:
            fh.write(instance_to_line(inst) + "\n")


def load_instances(path: str | Path) -> list[Instance]:
    with open(path, encoding="utf-8") as fh:
        return [
            instance_from_line(line)
            for line in fh
            if line.strip() and not line.lstrip().startswith("#")
        ]
