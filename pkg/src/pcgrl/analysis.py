"""Grid search oracles: region counting, map diameter, and point-to-point paths.

All movement is 4-connected. Two distance conventions coexist on purpose:
``longest_shortest_path`` counts tiles on the path (two adjacent cells are at
distance 2), while the ``*_moves`` functions count edges, i.e. steps taken.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .levels import Level

# Valid in every alphabet: up, down, left, right as (dx, dy).
MOVES: tuple[tuple[int, int], ...] = ((0, -1), (0, 1), (-1, 0), (1, 0))
MOVE_NAMES: tuple[str, ...] = ("up", "down", "left", "right")


@dataclass(frozen=True)
class RegionReport:
    """4-connected components of passable cells. Label 0 marks impassable cells."""

    region_count: int
    label_grid: np.ndarray

    def label_of(self, x: int, y: int) -> int:
        return int(self.label_grid[y, x])


def passable_mask(level: Level, passable: Iterable[int]) -> np.ndarray:
    return np.isin(level.grid, np.asarray(list(passable), dtype=np.int16))


def count_regions(level: Level, passable: Iterable[int]) -> RegionReport:
    """Label 4-connected regions of passable cells via flood fill."""
    mask = passable_mask(level, passable)
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    count = 0
    for sy in range(h):
        for sx in range(w):
            if not mask[sy, sx] or labels[sy, sx]:
                continue
            count += 1
            stack = [(sx, sy)]
            labels[sy, sx] = count
            while stack:
                x, y = stack.pop()
                for dx, dy in MOVES:
                    nx, ny = x + dx, y + dy
                    if 0 <= nx < w and 0 <= ny < h and mask[ny, nx] and not labels[ny, nx]:
                        labels[ny, nx] = count
                        stack.append((nx, ny))
    return RegionReport(region_count=count, label_grid=labels)


def grid_geometry(mask: np.ndarray) -> tuple[int, int]:
    """(region count, diameter in path tiles) of a passability mask.

    One breadth-first expansion runs from every passable cell simultaneously,
    each grid row packed into a uint64 bitboard (one bit per column). The
    number of growth rounds is the largest shortest-path move count over all
    cell pairs, and at the fixed point two sources share a component exactly
    when their reach rows are identical. Grids wider than 64 fall back to a
    plain per-source BFS.
    """
    h, w = mask.shape
    ys, xs = np.nonzero(mask)
    n_src = ys.size
    if n_src == 0:
        return 0, 0
    if w > 64:
        return _grid_geometry_slow(mask)
    bits = np.uint64(1) << xs.astype(np.uint64)
    mask_rows = np.zeros(h, dtype=np.uint64)
    np.bitwise_or.at(mask_rows, ys, bits)
    reach = np.zeros((n_src, h), dtype=np.uint64)
    reach[np.arange(n_src), ys] = bits
    # open = passable cells not yet reached, per source
    open_rows = mask_rows & ~reach
    one = np.uint64(1)
    grown = np.empty_like(reach)
    moves = 0
    while True:
        np.left_shift(reach, one, out=grown)
        grown |= reach >> one
        grown[:, :-1] |= reach[:, 1:]
        grown[:, 1:] |= reach[:, :-1]
        grown &= open_rows
        if not grown.any():
            break
        reach |= grown
        open_rows ^= grown
        moves += 1
    rows = np.ascontiguousarray(reach).view(np.dtype((np.void, reach.shape[1] * 8)))
    regions = len(np.unique(rows.ravel()))
    return regions, moves + 1


def _grid_geometry_slow(mask: np.ndarray) -> tuple[int, int]:
    h, w = mask.shape
    moves = 0
    seen = np.zeros((h, w), dtype=bool)
    regions = 0
    for sy in range(h):
        for sx in range(w):
            if mask[sy, sx] and not seen[sy, sx]:
                regions += 1
                seen |= _bfs_distances(mask, (sx, sy)) >= 0
            if mask[sy, sx]:
                moves = max(moves, int(_bfs_distances(mask, (sx, sy)).max()))
    return regions, moves + 1


def longest_shortest_path(level: Level, passable: Iterable[int]) -> int:
    """Grid diameter in tiles on the path (both endpoints counted).

    Returns 0 when no cell is passable, 1 for an isolated cell; two adjacent
    cells are at distance 2.
    """
    return grid_geometry(passable_mask(level, passable))[1]


def _bfs_distances(mask: np.ndarray, start: tuple[int, int]) -> np.ndarray:
    """Move-count distances from ``start`` over passable cells; -1 = unreachable."""
    h, w = mask.shape
    dist = np.full((h, w), -1, dtype=np.int32)
    sx, sy = start
    if not mask[sy, sx]:
        return dist
    dist[sy, sx] = 0
    queue = deque([(sx, sy)])
    while queue:
        x, y = queue.popleft()
        d = dist[y, x] + 1
        for dx, dy in MOVES:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and mask[ny, nx] and dist[ny, nx] < 0:
                dist[ny, nx] = d
                queue.append((nx, ny))
    return dist


def shortest_path_moves(
    level: Level,
    start: tuple[int, int],
    goal: tuple[int, int],
    passable: Iterable[int],
) -> Optional[int]:
    """BFS move count between two cells, or None when unreachable.

    None is also returned when either endpoint is impassable. Identical
    endpoints on a passable cell give 0.
    """
    w, h = level.width, level.height
    for x, y in (start, goal):
        if not (0 <= x < w and 0 <= y < h):
            raise ValueError(f"coordinate ({x}, {y}) outside {w}x{h} grid")
    mask = passable_mask(level, passable)
    if not mask[start[1], start[0]] or not mask[goal[1], goal[0]]:
        return None
    dist = _bfs_distances(mask, start)
    d = int(dist[goal[1], goal[0]])
    return None if d < 0 else d


def _find_tiles(level: Level, tile: int) -> list[tuple[int, int]]:
    ys, xs = np.nonzero(level.grid == tile)
    return [(int(x), int(y)) for x, y in zip(xs, ys)]


def zelda_solution_length(level: Level) -> Optional[int]:
    """Moves for player -> key plus key -> door; None when either leg is unreachable.

    Requires exactly one player, key, and door. Only solid blocks movement:
    enemies are hazards on walkable floor, not walls.
    """
    from .levels import zelda_alphabet

    alpha = zelda_alphabet()
    players = _find_tiles(level, alpha.index("player"))
    keys = _find_tiles(level, alpha.index("key"))
    doors = _find_tiles(level, alpha.index("door"))
    if len(players) != 1 or len(keys) != 1 or len(doors) != 1:
        raise ValueError(
            f"need exactly one player/key/door, got {len(players)}/{len(keys)}/{len(doors)}"
        )
    passable = [i for i, name in enumerate(alpha.tiles) if name != "solid"]
    leg1 = shortest_path_moves(level, players[0], keys[0], passable)
    if leg1 is None:
        return None
    leg2 = shortest_path_moves(level, keys[0], doors[0], passable)
    if leg2 is None:
        return None
    return leg1 + leg2


def nearest_enemy_distance(level: Level) -> Optional[int]:
    """Move distance from the player to the closest enemy, walls impassable.

    None when there is no enemy or none is reachable. Requires exactly one
    player.
    """
    from .levels import zelda_alphabet

    alpha = zelda_alphabet()
    players = _find_tiles(level, alpha.index("player"))
    if len(players) != 1:
        raise ValueError(f"need exactly one player, got {len(players)}")
    enemies = _find_tiles(level, alpha.index("enemy"))
    if not enemies:
        return None
    passable = [i for i, name in enumerate(alpha.tiles) if name != "solid"]
    dist = _bfs_distances(passable_mask(level, passable), players[0])
    reachable = [int(dist[y, x]) for x, y in enemies if dist[y, x] >= 0]
    return min(reachable) if reachable else None
