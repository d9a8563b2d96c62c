"""Command-line front end: train, eval, generate, solve, render.

Exit codes: 0 on success, 1 on usage errors, 2 on runtime failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from .env import EnvConfig, load_env_config
from .harness import NetworkPolicy, Policy, RandomPolicy, evaluate, generate
from .levels import ALPHABETS, deserialize_level, render_ascii
from .nets import load_policy, save_policy
from .ppo import TrainerConfig, train, write_training_log
from .problems import PROBLEMS, problem_from_json, problem_to_json
from .representations import RepKind
from .sokoban import solve_sokoban

MOVE_CHARS = {"up": "U", "down": "D", "left": "L", "right": "R"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="pcgrl", description="Train and evaluate level-designing agents.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a policy", add_help=True)
    p_train.add_argument("--problem", choices=sorted(PROBLEMS), default="binary")
    p_train.add_argument("--rep", choices=[k.value for k in RepKind], default="narrow")
    p_train.add_argument("--config", help="environment configuration JSON file")
    p_train.add_argument("--out", required=True, help="output policy JSON file")
    p_train.add_argument("--log", help="training-curve CSV file")
    p_train.add_argument("--steps", type=int, default=200_000)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--hidden", type=int, default=128)
    p_train.add_argument("--n-envs", type=int, default=8)

    p_eval = sub.add_parser("eval", help="success-rate sweep over change budgets")
    p_eval.add_argument("--policy", action="append", default=[], help="policy JSON file (repeatable)")
    p_eval.add_argument("--random", action="store_true", help="include the random baseline")
    p_eval.add_argument("--pct-grid", default="0:1:0.1", help="a:b:step or comma-separated list")
    p_eval.add_argument("--n", type=int, default=40)
    p_eval.add_argument("--out", required=True, help="output report CSV")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--sample", action="store_true", help="sample actions instead of argmax")
    p_eval.add_argument("--problem", choices=sorted(PROBLEMS))
    p_eval.add_argument("--rep", choices=[k.value for k in RepKind])
    p_eval.add_argument("--config", help="environment configuration JSON file")

    p_gen = sub.add_parser("generate", help="generate levels with a trained policy")
    p_gen.add_argument("--policy", required=True)
    p_gen.add_argument("--pct", type=float, default=1.0)
    p_gen.add_argument("--n", type=int, default=40)
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--config", help="environment configuration JSON file")

    p_solve = sub.add_parser("solve", help="solve a sokoban level file")
    p_solve.add_argument("--level", required=True)
    p_solve.add_argument("--node-limit", type=int, default=5000)

    p_render = sub.add_parser("render", help="print a level file as ASCII")
    p_render.add_argument("--level", required=True)

    return parser


def _env_from_args(args, policy_meta: Optional[dict] = None) -> EnvConfig:
    if getattr(args, "config", None):
        return load_env_config(args.config)
    if policy_meta is not None:
        return EnvConfig(
            problem=problem_from_json(policy_meta["problem"]),
            rep=RepKind(policy_meta["rep"]),
            seed=getattr(args, "seed", 0),
        )
    if not getattr(args, "problem", None) or not getattr(args, "rep", None):
        raise UsageError("need --config, a --policy file, or both --problem and --rep")
    return EnvConfig(
        problem=PROBLEMS[args.problem](),
        rep=RepKind(args.rep),
        seed=getattr(args, "seed", 0),
    )


def _parse_pct_grid(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad pct grid {text!r}, expected start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise UsageError("pct grid step must be positive")
        grid = []
        value = start
        while value <= stop + 1e-9:
            grid.append(round(value, 10))
            value += step
        return grid
    return [float(p) for p in text.split(",") if p.strip()]


def _load_network_policy(path: str, sample: bool) -> tuple[NetworkPolicy, dict]:
    params, meta = load_policy(path)
    name = os.path.splitext(os.path.basename(path))[0]
    return NetworkPolicy(params, name=name, sample=sample), meta


def _cmd_train(args) -> int:
    env_config = _env_from_args(args)
    trainer = TrainerConfig(
        total_steps=args.steps,
        hidden_dim=args.hidden,
        seed=args.seed,
        n_envs=args.n_envs,
    )
    env_config = EnvConfig(
        problem=env_config.problem,
        rep=env_config.rep,
        change_percentage=env_config.change_percentage,
        max_steps=env_config.max_steps,
        seed=args.seed,
        narrow_location_mode="random",
    )
    params, log_rows = train(env_config, trainer)
    save_policy(args.out, params, env_config.rep.value, problem_to_json(env_config.problem))
    if args.log:
        write_training_log(args.log, log_rows)
    final = log_rows[-1] if log_rows else None
    print(f"saved policy to {args.out}")
    if final:
        print(f"steps={final.steps} mean_reward={final.mean_reward:.3f} success_rate={final.success_rate:.3f}")
    return 0


def _cmd_eval(args) -> int:
    policies: list[Policy] = []
    meta = None
    for path in args.policy:
        policy, meta = _load_network_policy(path, args.sample)
        policies.append(policy)
    if args.random or not policies:
        policies.append(RandomPolicy())
    env_config = _env_from_args(args, policy_meta=meta)
    report = evaluate(policies, env_config, _parse_pct_grid(args.pct_grid), args.n, args.seed)
    report.write_csv(args.out)
    print(report.to_csv(), end="")
    return 0


def _cmd_generate(args) -> int:
    policy, meta = _load_network_policy(args.policy, sample=False)
    env_config = _env_from_args(args, policy_meta=meta)
    summary = generate(policy, env_config, args.pct, args.n, args.out, args.seed)
    successes = sum(1 for row in summary["levels"] if row["success"])
    print(f"wrote {len(summary['levels'])} levels to {args.out} ({successes} successful)")
    return 0


def _cmd_solve(args) -> int:
    with open(args.level, "r", encoding="utf-8") as fh:
        level, problem = deserialize_level(fh.read())
    if problem != "sokoban":
        raise UsageError(f"solve expects a sokoban level, got problem {problem!r}")
    solution = solve_sokoban(level, args.node_limit)
    if solution is None:
        print("no solution found")
        return 0
    moves = "".join(MOVE_CHARS[m] for m in solution.moves)
    print(f"length={solution.length} moves={moves} nodes={solution.nodes_expanded}")
    return 0


def _cmd_render(args) -> int:
    with open(args.level, "r", encoding="utf-8") as fh:
        level, problem = deserialize_level(fh.read())
    print(render_ascii(level, ALPHABETS[problem]()))
    return 0


COMMANDS = {
    "train": _cmd_train,
    "eval": _cmd_eval,
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "render": _cmd_render,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
