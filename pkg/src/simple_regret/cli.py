"""Command-line front end.

Settings are resolved as: subcommand defaults, then ``--preset``, then
``--config`` file (``key=value`` lines), then explicit flags.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from .bandit import PolicySpec, TrueArms
from .bounds import BoundParams, bound_eps_greedy, bound_ucb_sqrt, bound_uniform
from .envs import BernoulliBandit, SailingInstance, SwitchTree, dump_instances, load_instances
from .harness import (
    PRESETS,
    ExperimentSpec,
    Family,
    RegretPoint,
    best_at_largest_budget,
    c_grid,
    make_instance,
    parse_budgets,
    run,
    sweep_exploration,
    write_csv,
)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}\n\n{self.format_help()}")


def _policies(text: str) -> tuple[PolicySpec, ...]:
    return tuple(PolicySpec.parse(p) for p in text.split(",") if p.strip())


def _c_values(text: str) -> tuple[float, ...]:
    """``lo:hi:N`` (N log-spaced values) or a comma-separated list."""
    if ":" in text:
        lo, hi, count = text.split(":")
        return c_grid(float(lo), float(hi), int(count))
    return tuple(float(v) for v in text.split(","))


def _flag(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> converter; keys double as config-file keys and long flag names
EXPERIMENT_KEYS: dict[str, Callable[[str], Any]] = {
    "arms": int,
    "size": int,
    "reps": int,
    "budgets": parse_budgets,
    "policies": _policies,
    "seed": int,
    "c-grid": _c_values,
    "tree-c": float,
    "depth": int,
    "max-steps": int,
    "frozen-wind": _flag,
    "threads": int,
}

FAMILY_DEFAULTS: dict[Family, dict[str, str]] = {
    Family.MAB: {
        "arms": "32", "reps": "2000", "budgets": "10:10000:log25",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2,uniform",
    },
    Family.TREE: {
        "arms": "16", "reps": "1000", "budgets": "10:10000:log25",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2",
    },
    Family.VOI_TREE: {
        "arms": "32", "reps": "1000", "budgets": "10:10000:log25",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2,voi",
    },
    Family.SAILING: {
        "size": "6", "reps": "500", "budgets": "397",
        "policies": "ucb:2,eps:0.5,ucbsqrt:2", "c-grid": "0.02:20:11",
    },
}


def _add_experiment_flags(p: argparse.ArgumentParser, replay: bool = False) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS), help="named experiment protocol to start from")
    p.add_argument("--config", type=Path, help="key=value file with experiment settings")
    p.add_argument("--arms", help="number of arms K (mab, tree, voi-tree)")
    p.add_argument("--size", help="lake size (sailing)")
    p.add_argument("--reps", help="repetitions (paired instances)")
    p.add_argument("--budgets", help="lo:hi:logN or comma list of sample budgets")
    p.add_argument("--policies", help="comma list of kind:param, kinds ucb,ucbsqrt,eps,uniform,voi")
    p.add_argument("--seed", help="master seed (fallback: $REGRET_SEED, then 0)")
    p.add_argument("--c-grid", dest="c_grid", help="exploration factors to sweep, lo:hi:N or list")
    p.add_argument("--tree-c", dest="tree_c", help="c of the UCB tree policy (default: root c)")
    p.add_argument("--depth", help="rollout depth cutoff")
    p.add_argument("--max-steps", dest="max_steps", help="episode step cap (sailing)")
    p.add_argument("--frozen-wind", dest="frozen_wind", action="store_const", const="true",
                   help="keep the wind constant (sailing)")
    p.add_argument("--threads", help="worker threads for repetitions")
    p.add_argument("--save-instances", dest="save_instances", type=Path,
                   help="write the generated instances to this replay file")
    p.add_argument("--out", type=Path, required=True, help="CSV output path")
    if replay:
        p.add_argument("--instances", type=Path, required=True, help="instance replay file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="simple-regret", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for family in Family:
        _add_experiment_flags(sub.add_parser(family.value, help=f"{family.value} experiment"))
    _add_experiment_flags(
        sub.add_parser("replay", help="re-run policies on instances from a replay file"),
        replay=True,
    )
    b = sub.add_parser("bounds", help="evaluate a simple-regret envelope")
    b.add_argument("--gaps", required=True, help="comma list of gaps (one must be 0)")
    b.add_argument("--n", type=float, required=True, help="number of samples")
    b.add_argument("--scheme", choices=("eps", "uniform", "ucbsqrt"), required=True)
    b.add_argument("--c", type=float, default=2.0, help="exploration factor (ucbsqrt)")
    b.add_argument("--epsilon", type=float, default=0.5, help="greedy probability (eps)")
    b.add_argument("--gamma", type=float, default=1.0)
    b.add_argument("--eta", type=float, default=0.05, help="confidence label only")
    return parser


def read_config(path: Path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not sep or key not in EXPERIMENT_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown or malformed setting {line!r}")
        out[key] = value.strip()
    return out


def _family_of(instance) -> Family:
    if isinstance(instance, BernoulliBandit):
        return Family.MAB
    if isinstance(instance, SwitchTree):
        return Family.TREE
    if isinstance(instance, SailingInstance):
        return Family.SAILING
    raise UsageError(f"unsupported instance {instance!r}")


def resolve_spec(command: str, args: argparse.Namespace) -> ExperimentSpec:
    instances = None
    if command == "replay":
        instances = tuple(load_instances(args.instances))
        if not instances:
            raise UsageError(f"{args.instances}: no instances")
        family = _family_of(instances[0])
    else:
        family = Family(command)
    settings = dict(FAMILY_DEFAULTS[family])
    if args.preset:
        preset = PRESETS[args.preset]
        if preset.family is not family and not (preset.family.is_tree and family.is_tree):
            raise UsageError(f"preset {args.preset} belongs to the {preset.family.value} family")
        settings.update(preset.values)
    if args.config:
        settings.update(read_config(args.config))
    for key in EXPERIMENT_KEYS:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            settings[key] = value
    if "seed" not in settings and os.environ.get("REGRET_SEED"):
        settings["seed"] = os.environ["REGRET_SEED"]
    if instances is not None and args.reps is None:
        settings["reps"] = str(len(instances))

    try:
        values = {key: EXPERIMENT_KEYS[key](text) for key, text in settings.items()}
        return ExperimentSpec(
            family=family,
            policies=values["policies"],
            budgets=values["budgets"],
            repetitions=values["reps"],
            seed=values.get("seed", 0),
            arms=values.get("arms", 32),
            size=values.get("size", 6),
            tree_c=values.get("tree-c"),
            c_values=values.get("c-grid"),
            depth_cutoff=values.get("depth"),
            max_steps=values.get("max-steps"),
            frozen_wind=values.get("frozen-wind", False),
            instances=instances,
            threads=values.get("threads", 1),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def run_experiment(spec: ExperimentSpec) -> list[RegretPoint]:
    if spec.c_values:
        return [p for pts in sweep_exploration(spec).values() for p in pts]
    return run(spec)


def _bounds(args: argparse.Namespace) -> int:
    try:
        truth = TrueArms.from_gaps([float(g) for g in args.gaps.split(",")])
        params = BoundParams(gamma=args.gamma, eta=args.eta)
        if args.scheme == "eps":
            value = bound_eps_greedy(truth, args.n, args.epsilon, params)
        elif args.scheme == "uniform":
            value = bound_uniform(truth, args.n, params)
        else:
            value = bound_ucb_sqrt(truth, args.n, args.c, params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"{value:.9g}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        if args.command == "bounds":
            return _bounds(args)
        spec = resolve_spec(args.command, args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.save_instances:
            dump_instances(args.save_instances, (make_instance(spec, r) for r in range(spec.repetitions)))
        points = run_experiment(spec)
        write_csv(points, args.out)
    except Exception as exc:
        log.debug("run failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    best = best_at_largest_budget(points)
    if best is not None:
        c = "" if best.c is None else f" c={best.c:g}"
        print(f"best at n={best.n}: {best.policy}{c} mean regret {best.value:.6g}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
