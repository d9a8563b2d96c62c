import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcgrl.analysis import (
    count_regions,
    grid_geometry,
    longest_shortest_path,
    nearest_enemy_distance,
    passable_mask,
    shortest_path_moves,
    zelda_solution_length,
)
from pcgrl.levels import Level, new_level, zelda_alphabet
from pcgrl.rng import make_rng

from conftest import levels_strategy


def floyd_warshall_diameter(mask: np.ndarray) -> int:
    """Independent oracle: all-pairs Floyd-Warshall, reported in path tiles."""
    h, w = mask.shape
    cells = np.flatnonzero(mask.ravel())
    n = cells.size
    if n == 0:
        return 0
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    index = {int(c): i for i, c in enumerate(cells)}
    for c in cells:
        y, x = divmod(int(c), w)
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and mask[ny, nx]:
                dist[index[int(c)], index[ny * w + nx]] = 1.0
    for k in range(n):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    return int(dist[np.isfinite(dist)].max()) + 1


def union_find_regions(mask: np.ndarray) -> int:
    """Independent oracle: union-find over passable 4-neighbours."""
    h, w = mask.shape
    parent = list(range(h * w))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for y in range(h):
        for x in range(w):
            if not mask[y, x]:
                continue
            for dx, dy in ((1, 0), (0, 1)):
                nx, ny = x + dx, y + dy
                if nx < w and ny < h and mask[ny, nx]:
                    parent[find(y * w + x)] = find(ny * w + nx)
    return len({find(y * w + x) for y in range(h) for x in range(w) if mask[y, x]})


def serpentine_10x10() -> Level:
    grid = np.ones((10, 10), dtype=np.int16)
    for y in range(0, 9, 2):
        grid[y, :] = 0
    grid[1, 9] = grid[5, 9] = 0
    grid[3, 0] = grid[7, 0] = 0
    return Level(grid)


class TestCountRegions:
    def test_all_empty_single_region(self):
        assert count_regions(new_level(3, 3, 0), [0]).region_count == 1

    def test_all_solid_no_regions(self):
        report = count_regions(new_level(3, 3, 1), [0])
        assert report.region_count == 0
        assert (report.label_grid == 0).all()

    def test_middle_column_splits_in_two(self):
        grid = np.zeros((3, 3), dtype=np.int16)
        grid[:, 1] = 1
        report = count_regions(Level(grid), [0])
        assert report.region_count == 2
        assert report.label_of(0, 0) != report.label_of(2, 0)

    @settings(deadline=None)
    @given(levels_strategy(n_tiles=2, max_side=8))
    def test_matches_union_find_oracle(self, lv):
        mask = passable_mask(lv, [0])
        assert count_regions(lv, [0]).region_count == union_find_regions(mask)

    def test_500_random_levels_vs_union_find(self):
        rng = make_rng(11)
        for _ in range(500):
            grid = (rng.random((8, 8)) < rng.random()).astype(np.int16)
            lv = Level(grid)
            assert count_regions(lv, [0]).region_count == union_find_regions(passable_mask(lv, [0]))


class TestLongestShortestPath:
    def test_serpentine_anchor_is_54(self):
        assert longest_shortest_path(serpentine_10x10(), [0]) == 54

    def test_open_square_corner_to_corner(self):
        for n in (1, 2, 5, 10, 14):
            assert longest_shortest_path(new_level(n, n, 0), [0]) == 2 * n - 1

    def test_no_passable_cells(self):
        assert longest_shortest_path(new_level(4, 4, 1), [0]) == 0

    def test_exhaustive_small_grids_vs_floyd_warshall(self):
        for h, w in ((1, 1), (2, 2), (3, 2), (3, 3)):
            for bits in itertools.product((0, 1), repeat=h * w):
                lv = Level(np.asarray(bits, dtype=np.int16).reshape(h, w))
                mask = passable_mask(lv, [0])
                assert longest_shortest_path(lv, [0]) == floyd_warshall_diameter(mask)

    def test_random_8x8_vs_floyd_warshall(self):
        rng = make_rng(5)
        for _ in range(50):
            lv = Level((rng.random((8, 8)) < rng.random()).astype(np.int16))
            mask = passable_mask(lv, [0])
            assert longest_shortest_path(lv, [0]) == floyd_warshall_diameter(mask)

    @settings(deadline=None)
    @given(levels_strategy(n_tiles=2, max_side=6))
    def test_random_sizes_vs_floyd_warshall(self, lv):
        mask = passable_mask(lv, [0])
        assert longest_shortest_path(lv, [0]) == floyd_warshall_diameter(mask)


class TestShortestPathMoves:
    def test_same_cell_is_zero(self):
        assert shortest_path_moves(new_level(3, 3, 0), (1, 1), (1, 1), [0]) == 0

    def test_open_corridor(self):
        assert shortest_path_moves(new_level(5, 1, 0), (0, 0), (4, 0), [0]) == 4

    def test_disconnected_returns_none(self):
        grid = np.zeros((1, 5), dtype=np.int16)
        grid[0, 2] = 1
        assert shortest_path_moves(Level(grid), (0, 0), (4, 0), [0]) is None

    def test_impassable_endpoint_returns_none(self):
        grid = np.zeros((1, 3), dtype=np.int16)
        grid[0, 0] = 1
        assert shortest_path_moves(Level(grid), (0, 0), (2, 0), [0]) is None

    def test_out_of_bounds_raises(self):
        with pytest.raises(ValueError):
            shortest_path_moves(new_level(3, 3, 0), (0, 0), (3, 0), [0])

    @settings(deadline=None)
    @given(levels_strategy(n_tiles=2, max_side=5), st.data())
    def test_adding_solid_never_shortens(self, lv, data):
        cells = [(x, y) for y in range(lv.height) for x in range(lv.width)]
        a = data.draw(st.sampled_from(cells))
        b = data.draw(st.sampled_from(cells))
        block = data.draw(st.sampled_from(cells))
        before = shortest_path_moves(lv, a, b, [0])
        if block in (a, b) or before is None:
            return
        after = shortest_path_moves(lv.with_tile(*block, 1), a, b, [0])
        assert after is None or after >= before


class TestZeldaSolutionLength:
    def test_straight_row(self):
        alpha = zelda_alphabet()
        grid = np.zeros((1, 5), dtype=np.int16)
        grid[0, 0] = alpha.index("player")
        grid[0, 2] = alpha.index("key")
        grid[0, 4] = alpha.index("door")
        assert zelda_solution_length(Level(grid)) == 4

    def test_walled_off_key(self):
        alpha = zelda_alphabet()
        grid = np.zeros((1, 5), dtype=np.int16)
        grid[0, 0] = alpha.index("player")
        grid[0, 1] = alpha.index("solid")
        grid[0, 2] = alpha.index("key")
        grid[0, 4] = alpha.index("door")
        assert zelda_solution_length(Level(grid)) is None

    def test_wrong_entity_counts_raise(self):
        with pytest.raises(ValueError):
            zelda_solution_length(new_level(3, 3, 0))

    def test_enemies_do_not_block(self):
        alpha = zelda_alphabet()
        grid = np.zeros((1, 5), dtype=np.int16)
        grid[0, 0] = alpha.index("player")
        grid[0, 1] = alpha.index("enemy")
        grid[0, 2] = alpha.index("key")
        grid[0, 3] = alpha.index("enemy")
        grid[0, 4] = alpha.index("door")
        assert zelda_solution_length(Level(grid)) == 4

    def test_random_levels_vs_two_leg_bfs_oracle(self):
        # Independent oracle: dict-based BFS over non-solid cells, two legs.
        from collections import deque

        alpha = zelda_alphabet()

        def bfs(level, src, dst):
            if level.get(*src) == 1 or level.get(*dst) == 1:
                return None
            dist = {src: 0}
            queue = deque([src])
            while queue:
                x, y = queue.popleft()
                if (x, y) == dst:
                    return dist[(x, y)]
                for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    nxt = (x + dx, y + dy)
                    if (
                        0 <= nxt[0] < level.width
                        and 0 <= nxt[1] < level.height
                        and level.get(*nxt) != 1
                        and nxt not in dist
                    ):
                        dist[nxt] = dist[(x, y)] + 1
                        queue.append(nxt)
            return None

        rng = make_rng(21)
        checked = 0
        while checked < 30:
            grid = rng.choice(6, size=(5, 5), p=[0.5, 0.3, 0.07, 0.07, 0.03, 0.03]).astype(np.int16)
            lv = Level(grid)
            spots = {
                name: [(int(x), int(y)) for y, x in zip(*np.nonzero(grid == alpha.index(name)))]
                for name in ("player", "key", "door")
            }
            if any(len(v) != 1 for v in spots.values()):
                continue
            leg1 = bfs(lv, spots["player"][0], spots["key"][0])
            leg2 = bfs(lv, spots["key"][0], spots["door"][0])
            expected = None if leg1 is None or leg2 is None else leg1 + leg2
            assert zelda_solution_length(lv) == expected
            checked += 1


class TestNearestEnemyDistance:
    def _level(self, rows):
        alpha = zelda_alphabet()
        table = {".": 0, "#": 1, "@": 2, "+": 3, "D": 4, "e": 5}
        grid = np.asarray([[table[c] for c in row] for row in rows], dtype=np.int16)
        return Level(grid)

    def test_adjacent_enemy(self):
        assert nearest_enemy_distance(self._level(["@e"])) == 1

    def test_no_enemies_returns_none(self):
        assert nearest_enemy_distance(self._level(["@.."])) is None

    def test_closest_of_two(self):
        # enemies at move distances 2 and 5
        assert nearest_enemy_distance(self._level(["@.e..e"])) == 2

    def test_unreachable_enemy_returns_none(self):
        assert nearest_enemy_distance(self._level(["@#e"])) is None

    def test_no_player_raises(self):
        with pytest.raises(ValueError):
            nearest_enemy_distance(self._level(["..e"]))

    def test_walls_lengthen_path(self):
        lv = self._level([
            "@#.",
            ".#e",
            "...",
        ])
        assert nearest_enemy_distance(lv) == 5


class TestGridGeometry:
    @settings(deadline=None)
    @given(levels_strategy(n_tiles=2, max_side=7))
    def test_matches_both_oracles(self, lv):
        mask = passable_mask(lv, [0])
        regions, diameter = grid_geometry(mask)
        assert regions == union_find_regions(mask)
        assert diameter == floyd_warshall_diameter(mask)
