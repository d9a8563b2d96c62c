"""Train narrow binary agents and sweep success rate against the change budget.

Produces one policy + training log per seed and a combined report CSV, the
same shape of analysis the evaluation harness runs during acceptance.

Usage:
    python3 scripts/binary_experiment.py --steps 400000 --seeds 0 1 2 --out runs/binary
"""

import argparse
import os
import time

from pcgrl.env import EnvConfig
from pcgrl.harness import NetworkPolicy, RandomPolicy, evaluate
from pcgrl.nets import save_policy
from pcgrl.ppo import TrainerConfig, train, write_training_log
from pcgrl.problems import binary_problem, problem_to_json
from pcgrl.representations import RepKind


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=400_000)
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--size", type=int, default=8)
    parser.add_argument("--n-eval", type=int, default=40)
    parser.add_argument("--out", default="runs/binary")
    args = parser.parse_args()

    os.makedirs(args.out, exist_ok=True)
    problem = binary_problem(args.size, args.size)
    policies = [RandomPolicy()]
    for seed in args.seeds:
        env_config = EnvConfig(problem=problem, rep=RepKind.NARROW, seed=seed)
        trainer = TrainerConfig(total_steps=args.steps, seed=seed)
        t0 = time.time()
        params, log = train(env_config, trainer)
        print(f"seed {seed}: trained {args.steps} steps in {time.time() - t0:.0f}s, "
              f"final success (train) {log[-1].success_rate:.2f}")
        save_policy(os.path.join(args.out, f"policy_{seed}.json"), params,
                    "narrow", problem_to_json(problem))
        write_training_log(os.path.join(args.out, f"log_{seed}.csv"), log)
        policies.append(NetworkPolicy(params, name=f"seed{seed}"))

    env_config = EnvConfig(problem=problem, rep=RepKind.NARROW, seed=999)
    grid = [round(0.1 * k, 1) for k in range(11)]
    report = evaluate(policies, env_config, grid, args.n_eval, seed=999)
    report.write_csv(os.path.join(args.out, "report.csv"))
    print(report.to_csv())


if __name__ == "__main__":
    main()
