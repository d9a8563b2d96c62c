"""Batch evaluation: success-vs-change-percentage sweeps, level dumps, diversity.

Every episode index maps to a fixed seed derived from the master seed, so all
policies and all budget points see the same start levels (paired comparison).
Narrow agents are evaluated in scan mode unless asked otherwise.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .env import EnvConfig, PcgrlEnv
from .levels import Level, serialize_level
from .nets import Params, policy_forward, softmax
from .problems import compute_stats, is_goal
from .representations import RepKind
from .rng import child_seed, make_rng, spawn_seeds


class Policy:
    """Maps observations to actions; reset(seed) fixes any per-episode randomness."""

    name = "policy"

    def reset(self, seed: int) -> None:  # noqa: B027 - optional hook
        pass

    def act(self, observation: np.ndarray, env: PcgrlEnv) -> int:
        raise NotImplementedError


class RandomPolicy(Policy):
    name = "random"

    def __init__(self) -> None:
        self._rng = make_rng(0)

    def reset(self, seed: int) -> None:
        self._rng = make_rng(seed)

    def act(self, observation: np.ndarray, env: PcgrlEnv) -> int:
        return int(self._rng.integers(env.action_space_size))


class NetworkPolicy(Policy):
    """Greedy argmax over the policy logits; ``sample=True`` draws instead."""

    def __init__(self, params: Params, name: str = "policy", sample: bool = False):
        self.params = params
        self.name = name
        self.sample = sample
        self._rng = make_rng(0)

    def reset(self, seed: int) -> None:
        self._rng = make_rng(seed)

    def act(self, observation: np.ndarray, env: PcgrlEnv) -> int:
        logits, _ = policy_forward(self.params, observation)
        if not self.sample:
            return int(np.argmax(logits))
        probs = softmax(logits)
        return int((np.cumsum(probs) > self._rng.random()).argmax())


class NoOpPolicy(Policy):
    """Always emits action 0 (narrow's explicit no-op)."""

    name = "noop"

    def act(self, observation: np.ndarray, env: PcgrlEnv) -> int:
        return 0


def serpentine_tile(x: int, y: int, width: int) -> int:
    """Tile of the canonical snake maze: open even rows, one connector per odd row."""
    if y % 2 == 0:
        return 0
    connector = width - 1 if y % 4 == 1 else 0
    return 0 if x == connector else 1


class SerpentineBuilder(Policy):
    """Scripted binary oracle: rewrites every visited cell to the snake maze.

    Only meaningful for the narrow representation; with a full change budget
    and one scan pass it deterministically produces a single long corridor.
    """

    name = "serpentine"

    def act(self, observation: np.ndarray, env: PcgrlEnv) -> int:
        x, y = env.state.rep_state.loc
        return serpentine_tile(x, y, env.config.problem.width) + 1


@dataclass(frozen=True)
class EvalRow:
    policy: str
    pct: float
    n: int
    success_rate: float
    mean_changed: float
    std_changed: float
    start_solved: int


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[EvalRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["policy", "pct", "n", "success_rate", "mean_changed", "std_changed", "start_solved"])
        for r in self.rows:
            writer.writerow([r.policy, r.pct, r.n, r.success_rate, r.mean_changed, r.std_changed, r.start_solved])
        return buf.getvalue()

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    def for_policy(self, name: str) -> list[EvalRow]:
        return [r for r in self.rows if r.policy == name]


def _run_episode(env: PcgrlEnv, policy: Policy, episode_seed: int) -> dict:
    obs = env.reset(seed=episode_seed)
    policy.reset(child_seed(episode_seed, 2))
    start_solved = is_goal(env.config.problem, env.state.initial_stats, env.state.initial_stats)
    start_level = env.state.level
    while not env.state.done:
        obs = env.step(policy.act(obs, env)).observation
    area = env.config.problem.width * env.config.problem.height
    return {
        "success": env.state.done_reason == "goal",
        "changed_fraction": env.state.changes_made / area,
        "start_solved": start_solved,
        "start_level": start_level,
        "final_level": env.state.level,
        "final_stats": dict(env.state.current_stats),
    }


def evaluate(
    policies: Sequence[Policy],
    env_config: EnvConfig,
    pct_grid: Sequence[float],
    n_levels: int,
    seed: int,
    narrow_mode: str = "scan",
) -> EvalReport:
    """Run n_levels paired episodes per (policy, budget point)."""
    if n_levels < 1:
        raise ValueError(f"n_levels must be >= 1, got {n_levels}")
    if any(not 0.0 <= p <= 1.0 for p in pct_grid):
        raise ValueError("pct grid entries must be in [0, 1]")
    episode_seeds = spawn_seeds(seed, n_levels)
    rows = []
    for policy in policies:
        for pct in pct_grid:
            env = PcgrlEnv(
                replace(env_config, change_percentage=pct, narrow_location_mode=narrow_mode)
            )
            outcomes = [_run_episode(env, policy, s) for s in episode_seeds]
            changed = np.array([o["changed_fraction"] for o in outcomes])
            rows.append(
                EvalRow(
                    policy=policy.name,
                    pct=float(pct),
                    n=n_levels,
                    success_rate=float(np.mean([o["success"] for o in outcomes])),
                    mean_changed=float(changed.mean()),
                    std_changed=float(changed.std()),
                    start_solved=int(sum(o["start_solved"] for o in outcomes)),
                )
            )
    return EvalReport(rows=tuple(rows))


def generate(
    policy: Policy,
    env_config: EnvConfig,
    pct: float,
    n: int,
    out_dir: str,
    seed: int,
    narrow_mode: str = "scan",
) -> dict:
    """Generate n levels at the given budget; writes start/final pairs plus a summary.

    With n=0, nothing is written and the summary is empty.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    summary = {"policy": policy.name, "pct": pct, "n": n, "levels": []}
    if n == 0:
        return summary
    os.makedirs(out_dir, exist_ok=True)
    env = PcgrlEnv(replace(env_config, change_percentage=pct, narrow_location_mode=narrow_mode))
    problem = env_config.problem
    for i, episode_seed in enumerate(spawn_seeds(seed, n)):
        outcome = _run_episode(env, policy, episode_seed)
        for tag in ("start", "final"):
            path = os.path.join(out_dir, f"{tag}_{i:03d}.json")
            try:
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(serialize_level(outcome[f"{tag}_level"], problem.name))
            except OSError as exc:
                raise OSError(f"failed writing level file {path}: {exc}") from exc
        summary["levels"].append(
            {
                "index": i,
                "start_file": f"start_{i:03d}.json",
                "final_file": f"final_{i:03d}.json",
                "success": outcome["success"],
                "changed_fraction": outcome["changed_fraction"],
                "final_stats": outcome["final_stats"],
            }
        )
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    return summary


def diversity(levels: Sequence[Level]) -> dict:
    """Mean pairwise fraction of differing cells and the count of identical pairs."""
    if len(levels) < 2:
        return {"mean_hamming": 0.0, "duplicates": 0}
    shape = levels[0].grid.shape
    if any(lv.grid.shape != shape for lv in levels):
        raise ValueError("diversity requires uniform level dimensions")
    stack = np.stack([lv.grid for lv in levels])
    n = len(levels)
    total = 0.0
    duplicates = 0
    area = shape[0] * shape[1]
    for i in range(n):
        diff = (stack[i + 1 :] != stack[i]).sum(axis=(1, 2))
        total += float(diff.sum()) / area
        duplicates += int((diff == 0).sum())
    pairs = n * (n - 1) // 2
    return {"mean_hamming": total / pairs, "duplicates": duplicates}
