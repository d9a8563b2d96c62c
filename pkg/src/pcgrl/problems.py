"""Per-problem stats, reward, and goal logic for binary, zelda, and sokoban.

The reward is potential-based: each stat has a target range, a level's
potential is the weighted sum of distances to those ranges, and a step's
reward is the drop in potential. Episode returns therefore telescope to
potential(start) - potential(end) no matter the path taken.

Stats that cannot be measured (e.g. solution length of a level with no
player) carry the sentinel -1 and are charged a configured distance instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .analysis import (
    count_regions,
    grid_geometry,
    nearest_enemy_distance,
    passable_mask,
    zelda_solution_length,
)
from .levels import Level, TileAlphabet, binary_alphabet, sokoban_alphabet, zelda_alphabet
from .sokoban import solve_sokoban

SENTINEL = -1

Stats = dict[str, int]


@dataclass(frozen=True)
class StatTarget:
    """Target range [lo, hi] for one stat, hi may be +inf.

    ``sentinel_distance`` is the range distance charged when the stat is the
    sentinel (unmeasurable); builders default it to width*height so an
    unmeasurable stat is worse than any measurable one.
    """

    name: str
    lo: float
    hi: float
    weight: float
    sentinel_distance: float = 0.0

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"target {self.name}: lo {self.lo} > hi {self.hi}")
        if self.weight < 0:
            raise ValueError(f"target {self.name}: weight must be >= 0")

    def distance(self, value: float) -> float:
        if value == SENTINEL:
            return self.sentinel_distance
        return max(0.0, self.lo - value, value - self.hi)


@dataclass(frozen=True)
class ProblemConfig:
    name: str
    alphabet: TileAlphabet
    width: int
    height: int
    targets: tuple[StatTarget, ...]
    thresholds: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"problem dimensions must be >= 1, got {self.width}x{self.height}")
        if any(v <= 0 for v in self.thresholds.values()):
            raise ValueError(f"thresholds must be positive, got {self.thresholds}")

    @property
    def n_tiles(self) -> int:
        return self.alphabet.n_tiles


def binary_problem(width: int = 14, height: int = 14) -> ProblemConfig:
    area = width * height
    return ProblemConfig(
        name="binary",
        alphabet=binary_alphabet(),
        width=width,
        height=height,
        # path_length's lo is per-episode: resolved to start path + path_gain.
        targets=(
            StatTarget("regions", 1, 1, weight=5, sentinel_distance=area),
            StatTarget("path_length", 0, math.inf, weight=1, sentinel_distance=area),
        ),
        thresholds={"path_gain": 20},
    )


def zelda_problem(width: int = 11, height: int = 7) -> ProblemConfig:
    area = width * height
    return ProblemConfig(
        name="zelda",
        alphabet=zelda_alphabet(),
        width=width,
        height=height,
        # No enemy-count target: the distance constraint is the only enemy rule,
        # and it is vacuously met when no enemy exists or none can reach the
        # player, hence sentinel_distance=0 for nearest_enemy.
        targets=(
            StatTarget("players", 1, 1, weight=3, sentinel_distance=area),
            StatTarget("keys", 1, 1, weight=3, sentinel_distance=area),
            StatTarget("doors", 1, 1, weight=3, sentinel_distance=area),
            StatTarget("path_length", 16, math.inf, weight=1, sentinel_distance=area),
            StatTarget("nearest_enemy", 4, math.inf, weight=1, sentinel_distance=0),
        ),
        thresholds={"min_path": 16, "min_enemy_dist": 4},
    )


def sokoban_problem(width: int = 5, height: int = 5) -> ProblemConfig:
    area = width * height
    return ProblemConfig(
        name="sokoban",
        alphabet=sokoban_alphabet(),
        width=width,
        height=height,
        targets=(
            StatTarget("players", 1, 1, weight=3, sentinel_distance=area),
            StatTarget("crates", 1, math.inf, weight=3, sentinel_distance=area),
            StatTarget("targets", 1, math.inf, weight=3, sentinel_distance=area),
            StatTarget("solution_length", 18, math.inf, weight=1, sentinel_distance=area),
        ),
        thresholds={"min_solution": 18, "node_limit": 5000},
    )


PROBLEMS = {
    "binary": binary_problem,
    "zelda": zelda_problem,
    "sokoban": sokoban_problem,
}


def _check_level(problem: ProblemConfig, level: Level) -> None:
    if level.width != problem.width or level.height != problem.height:
        raise ValueError(
            f"level is {level.width}x{level.height}, problem expects {problem.width}x{problem.height}"
        )
    if int(level.grid.max()) >= problem.n_tiles:
        raise ValueError("level contains tiles outside the problem alphabet")


def _tile_count(level: Level, tile: int) -> int:
    return int((level.grid == tile).sum())


def _non_solid(alphabet: TileAlphabet) -> list[int]:
    return [i for i, name in enumerate(alphabet.tiles) if name != "solid"]


def compute_stats(problem: ProblemConfig, level: Level) -> Stats:
    """Measure every stat of the problem; expensive ones short-circuit to the sentinel.

    Zelda's path needs exactly one player/key/door; sokoban's solver runs only
    when the level has one player, matching nonzero crate/target counts, and
    all of them in a single region.
    """
    _check_level(problem, level)
    alpha = problem.alphabet
    if problem.name == "binary":
        regions, path_tiles = grid_geometry(passable_mask(level, [alpha.index("empty")]))
        return {"regions": regions, "path_length": path_tiles}
    if problem.name == "zelda":
        stats = {
            "players": _tile_count(level, alpha.index("player")),
            "keys": _tile_count(level, alpha.index("key")),
            "doors": _tile_count(level, alpha.index("door")),
            "enemies": _tile_count(level, alpha.index("enemy")),
            "regions": count_regions(level, _non_solid(alpha)).region_count,
            "nearest_enemy": SENTINEL,
            "path_length": SENTINEL,
        }
        if stats["players"] == 1:
            dist = nearest_enemy_distance(level)
            stats["nearest_enemy"] = SENTINEL if dist is None else dist
        if stats["players"] == stats["keys"] == stats["doors"] == 1:
            length = zelda_solution_length(level)
            stats["path_length"] = SENTINEL if length is None else length
        return stats
    if problem.name == "sokoban":
        report = count_regions(level, _non_solid(alpha))
        stats = {
            "players": _tile_count(level, alpha.index("player")),
            "crates": _tile_count(level, alpha.index("crate")),
            "targets": _tile_count(level, alpha.index("target")),
            "regions": report.region_count,
            "solution_length": SENTINEL,
        }
        if (
            stats["players"] == 1
            and stats["crates"] == stats["targets"] >= 1
            and _single_region_entities(problem, level, report)
        ):
            solution = solve_sokoban(level, int(problem.thresholds["node_limit"]))
            stats["solution_length"] = SENTINEL if solution is None else solution.length
        return stats
    raise ValueError(f"unknown problem {problem.name!r}")


def _single_region_entities(problem: ProblemConfig, level: Level, report) -> bool:
    alpha = problem.alphabet
    entity_tiles = [alpha.index("player"), alpha.index("crate"), alpha.index("target")]
    labels = {
        int(label)
        for tile in entity_tiles
        for label in report.label_grid[level.grid == tile]
    }
    return len(labels) == 1 and 0 not in labels


def episode_targets(problem: ProblemConfig, initial_stats: Stats) -> tuple[StatTarget, ...]:
    """Resolve per-episode targets; binary's path goal is relative to the start level."""
    if problem.name != "binary":
        return problem.targets
    gain = problem.thresholds["path_gain"]
    resolved = []
    for t in problem.targets:
        if t.name == "path_length":
            t = replace(t, lo=initial_stats["path_length"] + gain)
        resolved.append(t)
    return tuple(resolved)


def stat_distance(targets: tuple[StatTarget, ...], stats: Stats) -> float:
    """Weighted distance of the stats to their target ranges; 0 means all satisfied."""
    return sum(t.weight * t.distance(stats[t.name]) for t in targets)


def reward(targets: tuple[StatTarget, ...], old: Stats, new: Stats) -> float:
    """Potential drop between consecutive stats; positive when the edit helped."""
    return stat_distance(targets, old) - stat_distance(targets, new)


def is_goal(problem: ProblemConfig, stats: Stats, initial_stats: Stats) -> bool:
    th = problem.thresholds
    if problem.name == "binary":
        return (
            stats["regions"] == 1
            and stats["path_length"] >= initial_stats["path_length"] + th["path_gain"]
        )
    if problem.name == "zelda":
        enemy_ok = stats["nearest_enemy"] == SENTINEL or stats["nearest_enemy"] >= th["min_enemy_dist"]
        return (
            stats["players"] == stats["keys"] == stats["doors"] == 1
            and stats["path_length"] >= th["min_path"]
            and enemy_ok
        )
    if problem.name == "sokoban":
        return (
            stats["players"] == 1
            and stats["crates"] == stats["targets"] >= 1
            and stats["solution_length"] >= th["min_solution"]
        )
    raise ValueError(f"unknown problem {problem.name!r}")


def problem_to_json(problem: ProblemConfig) -> dict:
    return {
        "name": problem.name,
        "width": problem.width,
        "height": problem.height,
        "start_probs": dict(zip(problem.alphabet.tiles, problem.alphabet.start_probs)),
        "targets": [
            {
                "name": t.name,
                "lo": t.lo,
                "hi": None if math.isinf(t.hi) else t.hi,
                "weight": t.weight,
                "sentinel_distance": t.sentinel_distance,
            }
            for t in problem.targets
        ],
        "thresholds": dict(problem.thresholds),
    }


def problem_from_json(doc: Mapping) -> ProblemConfig:
    """Build a ProblemConfig from a JSON document; missing fields use the defaults."""
    name = doc.get("name")
    if name not in PROBLEMS:
        raise ValueError(f"unknown problem name {name!r}")
    base = PROBLEMS[name](
        width=int(doc.get("width", PROBLEMS[name]().width)),
        height=int(doc.get("height", PROBLEMS[name]().height)),
    )
    alphabet = base.alphabet
    if "start_probs" in doc:
        alphabet = alphabet.with_start_probs(doc["start_probs"])
    targets = base.targets
    if "targets" in doc:
        area = base.width * base.height
        targets = tuple(
            StatTarget(
                name=t["name"],
                lo=float(t["lo"]),
                hi=math.inf if t.get("hi") is None else float(t["hi"]),
                weight=float(t.get("weight", 1.0)),
                sentinel_distance=float(t.get("sentinel_distance", area)),
            )
            for t in doc["targets"]
        )
    thresholds = dict(base.thresholds)
    thresholds.update(doc.get("thresholds", {}))
    return ProblemConfig(
        name=name,
        alphabet=alphabet,
        width=base.width,
        height=base.height,
        targets=targets,
        thresholds=thresholds,
    )


def load_problem(path: str) -> ProblemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return problem_from_json(json.load(fh))
