"""Episode loop: problem + representation + change budget.

An episode starts from a randomly sampled level and ends when the goal is
met, the change budget is spent, or the step limit is hit. Rewards come from
the problem's potential; stats are recomputed only on steps that actually
changed a tile, so no-ops carry reward exactly 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .levels import Level, sample_start_level
from .problems import (
    ProblemConfig,
    Stats,
    StatTarget,
    compute_stats,
    episode_targets,
    is_goal,
    problem_from_json,
    reward,
)
from .representations import (
    RepKind,
    RepState,
    action_space_size,
    apply_action,
    init_rep_state,
    observation_shape,
    observe,
)
from .rng import child_seed, make_rng


class EpisodeDoneError(RuntimeError):
    """step() was called on a finished episode."""


@dataclass(frozen=True)
class EnvConfig:
    problem: ProblemConfig
    rep: RepKind
    change_percentage: float = 0.2
    max_steps: Optional[int] = None  # None: w*h for narrow/wide, 4*w*h for turtle
    seed: int = 0
    narrow_location_mode: str = "random"

    def __post_init__(self) -> None:
        if not 0.0 <= self.change_percentage <= 1.0:
            raise ValueError(f"change_percentage must be in [0, 1], got {self.change_percentage}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.narrow_location_mode not in ("random", "scan"):
            raise ValueError(f"narrow_location_mode must be 'random' or 'scan'")

    @property
    def resolved_max_steps(self) -> int:
        if self.max_steps is not None:
            return self.max_steps
        area = self.problem.width * self.problem.height
        return 4 * area if self.rep == RepKind.TURTLE else area

    @property
    def max_changes(self) -> int:
        # Tolerance absorbs float noise in pct * area so e.g. 0.3 * 10 stays 3.
        area = self.problem.width * self.problem.height
        return max(0, math.ceil(self.change_percentage * area - 1e-9))


@dataclass
class EpisodeState:
    level: Level
    rep_state: RepState
    initial_stats: Stats
    current_stats: Stats
    targets: tuple[StatTarget, ...]
    changes_made: int = 0
    steps_taken: int = 0
    done: bool = False
    done_reason: str = "running"


@dataclass(frozen=True)
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool
    info: dict = field(repr=False)


class PcgrlEnv:
    """Single-threaded environment instance; one episode at a time.

    reset() without an explicit seed walks a deterministic per-instance seed
    sequence derived from config.seed, so (config, seed) fully determines
    every episode.
    """

    def __init__(self, config: EnvConfig):
        self.config = config
        self._episode_index = 0
        self._state: Optional[EpisodeState] = None

    @property
    def state(self) -> EpisodeState:
        if self._state is None:
            raise RuntimeError("environment not reset yet")
        return self._state

    @property
    def action_space_size(self) -> int:
        p = self.config.problem
        return action_space_size(self.config.rep, p.width, p.height, p.n_tiles)

    @property
    def observation_shape(self) -> tuple[int, int, int]:
        p = self.config.problem
        return observation_shape(self.config.rep, p.width, p.height, p.n_tiles)

    @property
    def max_changes(self) -> int:
        return self.config.max_changes

    def reset(self, seed: Optional[int] = None, start_level: Optional[Level] = None) -> np.ndarray:
        """Start a new episode; returns the first observation.

        The goal is never granted here: a start level that already satisfies
        it still requires one confirming step.
        """
        if seed is None:
            seed = child_seed(self.config.seed, self._episode_index)
        self._episode_index += 1
        level_rng = make_rng(child_seed(seed, 0))
        loc_rng = make_rng(child_seed(seed, 1))
        problem = self.config.problem
        if start_level is None:
            level = sample_start_level(problem.alphabet, problem.width, problem.height, level_rng)
        else:
            level = start_level
        rep_state = init_rep_state(
            self.config.rep, problem.width, problem.height, loc_rng, self.config.narrow_location_mode
        )
        stats = compute_stats(problem, level)
        self._state = EpisodeState(
            level=level,
            rep_state=rep_state,
            initial_stats=stats,
            current_stats=stats,
            targets=episode_targets(problem, stats),
        )
        return observe(rep_state, level, problem.n_tiles)

    def step(self, action: int) -> StepResult:
        state = self.state
        if state.done:
            raise EpisodeDoneError(f"episode already done ({state.done_reason})")
        problem = self.config.problem

        level, rep_state, changed = apply_action(state.level, state.rep_state, action, problem.n_tiles)
        if changed and state.changes_made >= self.max_changes:
            # Only reachable with a zero budget (change_percentage 0): the
            # episode ends this step, and the edit must not land.
            level, changed = state.level, False

        step_reward = 0.0
        if changed:
            new_stats = compute_stats(problem, level)
            step_reward = reward(state.targets, state.current_stats, new_stats)
            state.current_stats = new_stats
            state.changes_made += 1
        state.level = level
        state.rep_state = rep_state
        state.steps_taken += 1

        if is_goal(problem, state.current_stats, state.initial_stats):
            state.done, state.done_reason = True, "goal"
        elif state.changes_made >= self.max_changes:
            state.done, state.done_reason = True, "budget"
        elif state.steps_taken >= self.config.resolved_max_steps:
            state.done, state.done_reason = True, "step_limit"

        return StepResult(
            observation=observe(rep_state, level, problem.n_tiles),
            reward=step_reward,
            done=state.done,
            info={
                "changes_made": state.changes_made,
                "steps_taken": state.steps_taken,
                "stats": dict(state.current_stats),
                "done_reason": state.done_reason,
            },
        )


def env_config_to_json(config: EnvConfig) -> dict:
    from .problems import problem_to_json

    return {
        "problem": problem_to_json(config.problem),
        "rep": config.rep.value,
        "change_percentage": config.change_percentage,
        "max_steps": config.max_steps,
        "seed": config.seed,
        "narrow_location_mode": config.narrow_location_mode,
    }


def env_config_from_json(doc: dict) -> EnvConfig:
    """Env configuration document: problem may be a name or a nested problem doc."""
    problem_doc = doc["problem"]
    if isinstance(problem_doc, str):
        problem_doc = {"name": problem_doc}
    config = EnvConfig(
        problem=problem_from_json(problem_doc),
        rep=RepKind(doc.get("rep", "narrow")),
        change_percentage=float(doc.get("change_percentage", 0.2)),
        max_steps=doc.get("max_steps"),
        seed=int(doc.get("seed", 0)),
        narrow_location_mode=doc.get("narrow_location_mode", "random"),
    )
    return config


def load_env_config(path: str) -> EnvConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return env_config_from_json(json.load(fh))
