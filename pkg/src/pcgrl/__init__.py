"""Level generation as a sequential decision process.

Levels are integer tile grids; agents edit them one tile at a time through
one of three interfaces (narrow, turtle, wide) and are scored by per-problem
potentials until a goal check or the change budget ends the episode. Includes
a from-scratch clipped-surrogate policy-gradient trainer and an evaluation
harness for success-vs-budget sweeps.
"""

from .env import EnvConfig, PcgrlEnv
from .levels import Level, TileAlphabet, new_level, sample_start_level
from .problems import PROBLEMS, ProblemConfig, binary_problem, sokoban_problem, zelda_problem
from .representations import RepKind

__all__ = [
    "EnvConfig",
    "PcgrlEnv",
    "Level",
    "TileAlphabet",
    "new_level",
    "sample_start_level",
    "PROBLEMS",
    "ProblemConfig",
    "binary_problem",
    "zelda_problem",
    "sokoban_problem",
    "RepKind",
]
