"""The three edit interfaces an agent can act through: narrow, turtle, wide.

Narrow edits a externally chosen cell (no-op or place a tile), turtle walks
one cell at a time and edits under itself, wide picks any (x, y, tile) in one
action. Narrow and turtle observations are translated so the active location
sits at the center of a doubled map with a dedicated out-of-map pad channel;
wide sees the raw one-hot map.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .analysis import MOVES
from .levels import Level, encode_one_hot


class RepKind(str, Enum):
    NARROW = "narrow"
    TURTLE = "turtle"
    WIDE = "wide"


@dataclass
class RepState:
    """Mutable per-episode agent state; loc is (x, y), meaningful for narrow/turtle.

    Narrow picks its next location from ``rng`` in "random" mode (training) or
    walks a row-major scan from a random start offset in "scan" mode
    (inference).
    """

    kind: RepKind
    loc: tuple[int, int]
    rng: np.random.Generator
    narrow_mode: str = "random"
    scan_index: int = 0


def init_rep_state(
    kind: RepKind,
    width: int,
    height: int,
    rng: np.random.Generator,
    narrow_mode: str = "random",
) -> RepState:
    """Start-of-episode state; narrow/turtle start locations are randomized."""
    if narrow_mode not in ("random", "scan"):
        raise ValueError(f"narrow_mode must be 'random' or 'scan', got {narrow_mode!r}")
    if kind == RepKind.WIDE:
        return RepState(kind=kind, loc=(0, 0), rng=rng)
    cell = int(rng.integers(width * height))
    return RepState(
        kind=kind,
        loc=(cell % width, cell // width),
        rng=rng,
        narrow_mode=narrow_mode,
        scan_index=cell,
    )


def action_space_size(kind: RepKind, width: int, height: int, n_tiles: int) -> int:
    if kind == RepKind.NARROW:
        return n_tiles + 1
    if kind == RepKind.TURTLE:
        return n_tiles + 4
    return width * height * n_tiles


def decode_wide(action: int, width: int, height: int, n_tiles: int) -> tuple[int, int, int]:
    """Split a flat wide action into (x, y, tile); inverse of encode_wide."""
    if not 0 <= action < width * height * n_tiles:
        raise ValueError(f"wide action {action} out of range [0, {width * height * n_tiles})")
    tile = action % n_tiles
    cell = action // n_tiles
    return cell % width, cell // width, tile


def encode_wide(x: int, y: int, tile: int, width: int, n_tiles: int) -> int:
    return (y * width + x) * n_tiles + tile


def apply_action(
    level: Level, state: RepState, action: int, n_tiles: int
) -> tuple[Level, RepState, bool]:
    """Apply one action; returns (level', state', changed).

    ``changed`` is True only for value-altering writes: no-ops, moves, and
    writes of the tile already present leave it False. Narrow advances to its
    next location whether or not the action edited anything.
    """
    w, h = level.width, level.height
    size = action_space_size(state.kind, w, h, n_tiles)
    if not 0 <= action < size:
        raise ValueError(f"action {action} out of range [0, {size}) for {state.kind.value}")

    if state.kind == RepKind.NARROW:
        changed = False
        new_level = level
        if action > 0:
            tile = action - 1
            changed = level.get(*state.loc) != tile
            if changed:
                new_level = level.with_tile(*state.loc, tile)
        if state.narrow_mode == "random":
            cell = int(state.rng.integers(w * h))
        else:
            cell = (state.scan_index + 1) % (w * h)
        new_state = replace(state, loc=(cell % w, cell // w), scan_index=cell)
        return new_level, new_state, changed

    if state.kind == RepKind.TURTLE:
        if action < 4:
            dx, dy = MOVES[action]
            x = min(max(state.loc[0] + dx, 0), w - 1)
            y = min(max(state.loc[1] + dy, 0), h - 1)
            return level, replace(state, loc=(x, y)), False
        tile = action - 4
        changed = level.get(*state.loc) != tile
        new_level = level.with_tile(*state.loc, tile) if changed else level
        return new_level, state, changed

    x, y, tile = decode_wide(action, w, h, n_tiles)
    changed = level.get(x, y) != tile
    new_level = level.with_tile(x, y, tile) if changed else level
    return new_level, state, changed


def observation_shape(kind: RepKind, width: int, height: int, n_tiles: int) -> tuple[int, int, int]:
    if kind == RepKind.WIDE:
        return (height, width, n_tiles)
    return (2 * height, 2 * width, n_tiles + 1)


def observe(state: RepState, level: Level, n_tiles: int) -> np.ndarray:
    """One-hot observation; narrow/turtle translate the map so loc lands at (w, h).

    The translated output is (2h, 2w, n_tiles + 1): source cell (x, y) maps to
    output cell (x + w - loc.x, y + h - loc.y), and cells outside the source
    footprint carry the pad channel (index n_tiles).
    """
    if state.kind == RepKind.WIDE:
        return encode_one_hot(level, n_tiles)
    w, h = level.width, level.height
    out = np.zeros((2 * h, 2 * w, n_tiles + 1), dtype=np.uint8)
    out[:, :, n_tiles] = 1
    x0 = w - state.loc[0]
    y0 = h - state.loc[1]
    out[y0 : y0 + h, x0 : x0 + w, :n_tiles] = encode_one_hot(level, n_tiles)
    out[y0 : y0 + h, x0 : x0 + w, n_tiles] = 0
    return out
