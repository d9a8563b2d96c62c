"""Tile-grid data model: alphabets, random level sampling, serialization, rendering.

A level is a 2D integer grid. Coordinates are (x=col, y=row) everywhere;
storage is row-major, so ``grid[y, x]`` is the tile at column x of row y.
Tile index 0 is always "empty" and index 1 always "solid".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


class LevelParseError(ValueError):
    """A level document is malformed; the message names the offending field."""


@dataclass(frozen=True)
class TileAlphabet:
    """Ordered tile set of a problem, with render glyphs and start-sampling probabilities."""

    problem: str
    tiles: tuple[str, ...]
    glyphs: tuple[str, ...]
    start_probs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.tiles) < 2 or self.tiles[0] != "empty" or self.tiles[1] != "solid":
            raise ValueError("alphabet must start with tiles ('empty', 'solid')")
        if len(self.glyphs) != len(self.tiles) or len(set(self.glyphs)) != len(self.glyphs):
            raise ValueError("glyphs must be distinct and match the tile count")
        if len(self.start_probs) != len(self.tiles):
            raise ValueError("start_probs must match the tile count")
        if any(p < 0 for p in self.start_probs):
            raise ValueError("start probabilities must be non-negative")
        if not math.isclose(sum(self.start_probs), 1.0, abs_tol=1e-9):
            raise ValueError(f"start probabilities sum to {sum(self.start_probs)}, expected 1")

    @property
    def n_tiles(self) -> int:
        return len(self.tiles)

    def index(self, name: str) -> int:
        return self.tiles.index(name)

    def with_start_probs(self, probs: dict[str, float]) -> "TileAlphabet":
        new = [probs.get(t, 0.0) for t in self.tiles]
        return TileAlphabet(self.problem, self.tiles, self.glyphs, tuple(new))


def binary_alphabet() -> TileAlphabet:
    return TileAlphabet(
        problem="binary",
        tiles=("empty", "solid"),
        glyphs=(".", "#"),
        start_probs=(0.5, 0.5),
    )


def zelda_alphabet() -> TileAlphabet:
    return TileAlphabet(
        problem="zelda",
        tiles=("empty", "solid", "player", "key", "door", "enemy"),
        glyphs=(".", "#", "@", "+", "D", "e"),
        start_probs=(0.58, 0.3, 0.02, 0.02, 0.02, 0.06),
    )


def sokoban_alphabet() -> TileAlphabet:
    return TileAlphabet(
        problem="sokoban",
        tiles=("empty", "solid", "player", "crate", "target"),
        glyphs=(".", "#", "@", "$", "*"),
        start_probs=(0.45, 0.4, 0.05, 0.05, 0.05),
    )


ALPHABETS = {
    "binary": binary_alphabet,
    "zelda": zelda_alphabet,
    "sokoban": sokoban_alphabet,
}


@dataclass(frozen=True, eq=False)
class Level:
    """Immutable 2D tile grid. ``grid`` has shape (height, width), dtype int16."""

    grid: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=np.int16)
        if grid.ndim != 2 or grid.shape[0] < 1 or grid.shape[1] < 1:
            raise ValueError(f"level grid must be 2D and non-empty, got shape {grid.shape}")
        if (grid < 0).any():
            raise ValueError("tile values must be non-negative")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    def get(self, x: int, y: int) -> int:
        return int(self.grid[y, x])

    def with_tile(self, x: int, y: int, tile: int) -> "Level":
        grid = self.grid.copy()
        grid[y, x] = tile
        return Level(grid)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Level):
            return NotImplemented
        return self.grid.shape == other.grid.shape and bool((self.grid == other.grid).all())

    def __hash__(self) -> int:
        return hash((self.grid.shape, self.grid.tobytes()))


def new_level(width: int, height: int, fill: int = 0) -> Level:
    """Create a width x height level with every cell set to ``fill``."""
    if width < 1 or height < 1:
        raise ValueError(f"level dimensions must be >= 1, got {width}x{height}")
    if fill < 0:
        raise ValueError(f"fill tile must be non-negative, got {fill}")
    return Level(np.full((height, width), fill, dtype=np.int16))


def sample_start_level(
    alphabet: TileAlphabet, width: int, height: int, rng: np.random.Generator
) -> Level:
    """Draw each cell i.i.d. from the alphabet's categorical start distribution."""
    if width < 1 or height < 1:
        raise ValueError(f"level dimensions must be >= 1, got {width}x{height}")
    probs = np.asarray(alphabet.start_probs, dtype=np.float64)
    probs = probs / probs.sum()
    cells = rng.choice(alphabet.n_tiles, size=(height, width), p=probs)
    return Level(cells.astype(np.int16))


def encode_one_hot(level: Level, num_tile_types: int) -> np.ndarray:
    """One-hot encode a level as a (height, width, num_tile_types) array of {0, 1}."""
    if int(level.grid.max()) >= num_tile_types:
        raise ValueError(
            f"tile value {int(level.grid.max())} out of range for {num_tile_types} tile types"
        )
    return (level.grid[:, :, None] == np.arange(num_tile_types)).astype(np.uint8)


def serialize_level(level: Level, problem: str) -> str:
    """Serialize to the level-file JSON document (cells row-major)."""
    doc = {
        "problem": problem,
        "width": level.width,
        "height": level.height,
        "cells": level.grid.ravel().tolist(),
    }
    return json.dumps(doc)


def deserialize_level(text: str) -> tuple[Level, str]:
    """Parse a level-file document; returns (level, problem name).

    Validates dimensions, cell count, and tile range against the named
    problem's alphabet.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LevelParseError(f"not valid JSON: line {exc.lineno}, col {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise LevelParseError("document root must be a JSON object")
    for key in ("problem", "width", "height", "cells"):
        if key not in doc:
            raise LevelParseError(f"missing field '{key}'")
    problem = doc["problem"]
    if problem not in ALPHABETS:
        raise LevelParseError(f"field 'problem': unknown problem {problem!r}")
    width, height = doc["width"], doc["height"]
    if not isinstance(width, int) or not isinstance(height, int) or width < 1 or height < 1:
        raise LevelParseError(f"fields 'width'/'height': invalid dimensions {width}x{height}")
    cells = doc["cells"]
    if not isinstance(cells, list) or len(cells) != width * height:
        raise LevelParseError(
            f"field 'cells': expected {width * height} cells, got {len(cells) if isinstance(cells, list) else type(cells).__name__}"
        )
    n_tiles = ALPHABETS[problem]().n_tiles
    for i, value in enumerate(cells):
        if not isinstance(value, int) or not 0 <= value < n_tiles:
            raise LevelParseError(f"field 'cells'[{i}]: tile value {value!r} out of range [0, {n_tiles})")
    grid = np.asarray(cells, dtype=np.int16).reshape(height, width)
    return Level(grid), problem


def render_ascii(level: Level, alphabet: TileAlphabet) -> str:
    """Render the level as height lines of width glyphs."""
    if int(level.grid.max()) >= alphabet.n_tiles:
        raise ValueError("level contains tiles outside the alphabet")
    glyphs = np.asarray(alphabet.glyphs)
    return "\n".join("".join(row) for row in glyphs[level.grid])
