"""Node-capped Sokoban solver: breadth-first search with an A* fallback.

States are (player position, frozenset of crate positions); a move into a
crate pushes it when the cell behind is free. BFS runs first and returns a
move-optimal solution when it finishes within its node budget. If BFS runs
out of budget while states remain, A* with the nearest-target Manhattan-sum
heuristic (admissible and consistent, so also move-optimal) gets a second
budget. Pushes into a non-target corner are pruned: such crates can never
move again.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple

from .analysis import MOVES, MOVE_NAMES
from .levels import Level, sokoban_alphabet

Pos = Tuple[int, int]
State = Tuple[Pos, FrozenSet[Pos]]


@dataclass(frozen=True)
class SokobanSolution:
    moves: tuple[str, ...]
    length: int
    nodes_expanded: int


@dataclass(frozen=True)
class SokobanInstance:
    width: int
    height: int
    walls: frozenset
    targets: frozenset
    player: Pos
    crates: frozenset

    def blocked(self, pos: Pos) -> bool:
        x, y = pos
        return x < 0 or y < 0 or x >= self.width or y >= self.height or pos in self.walls


def instance_from_level(level: Level) -> SokobanInstance:
    alpha = sokoban_alphabet()
    solid = alpha.index("solid")
    player_t, crate_t, target_t = alpha.index("player"), alpha.index("crate"), alpha.index("target")
    walls, targets, crates, players = set(), set(), set(), []
    for y in range(level.height):
        for x in range(level.width):
            t = level.get(x, y)
            if t == solid:
                walls.add((x, y))
            elif t == target_t:
                targets.add((x, y))
            elif t == crate_t:
                crates.add((x, y))
            elif t == player_t:
                players.append((x, y))
    if len(players) != 1:
        raise ValueError(f"need exactly one player, got {len(players)}")
    if len(crates) != len(targets) or not crates:
        raise ValueError(f"need equal nonzero crate/target counts, got {len(crates)}/{len(targets)}")
    return SokobanInstance(
        width=level.width,
        height=level.height,
        walls=frozenset(walls),
        targets=frozenset(targets),
        player=players[0],
        crates=frozenset(crates),
    )


def _corner_dead(inst: SokobanInstance, pos: Pos) -> bool:
    """A crate in a non-target corner can never be pushed again."""
    if pos in inst.targets:
        return False
    x, y = pos
    up = inst.blocked((x, y - 1))
    down = inst.blocked((x, y + 1))
    left = inst.blocked((x - 1, y))
    right = inst.blocked((x + 1, y))
    return (up or down) and (left or right)


def _successors(inst: SokobanInstance, state: State):
    """Yield (move index, next state) in the fixed order up, down, left, right."""
    (px, py), crates = state
    for m, (dx, dy) in enumerate(MOVES):
        nx, ny = px + dx, py + dy
        step = (nx, ny)
        if inst.blocked(step):
            continue
        if step in crates:
            dest = (nx + dx, ny + dy)
            if inst.blocked(dest) or dest in crates or _corner_dead(inst, dest):
                continue
            yield m, (step, crates - {step} | {dest})
        else:
            yield m, (step, crates)


def _reconstruct(parents: dict, state: State) -> tuple[str, ...]:
    moves = []
    while True:
        prev, m = parents[state]
        if m is None:
            return tuple(reversed(moves))
        moves.append(MOVE_NAMES[m])
        state = prev


def _bfs_phase(inst: SokobanInstance, node_limit: int):
    """Returns (solution moves or None, nodes expanded, exhausted flag)."""
    root: State = (inst.player, inst.crates)
    if root[1] == inst.targets:
        return (), 0, True
    parents = {root: (None, None)}
    queue = deque([root])
    expanded = 0
    while queue:
        if expanded >= node_limit:
            return None, expanded, False
        state = queue.popleft()
        expanded += 1
        for m, nxt in _successors(inst, state):
            if nxt in parents:
                continue
            parents[nxt] = (state, m)
            if nxt[1] == inst.targets:
                return _reconstruct(parents, nxt), expanded, True
            queue.append(nxt)
    return None, expanded, True


def _heuristic(inst: SokobanInstance, crates) -> int:
    total = 0
    for cx, cy in crates:
        if (cx, cy) in inst.targets:
            continue
        total += min(abs(cx - tx) + abs(cy - ty) for tx, ty in inst.targets)
    return total


def _astar_phase(inst: SokobanInstance, node_limit: int):
    root: State = (inst.player, inst.crates)
    if root[1] == inst.targets:
        return (), 0, True
    parents = {root: (None, None)}
    g_cost = {root: 0}
    counter = 0
    heap = [(_heuristic(inst, root[1]), counter, root)]
    closed = set()
    expanded = 0
    while heap:
        if expanded >= node_limit:
            return None, expanded, False
        _, _, state = heapq.heappop(heap)
        if state in closed:
            continue
        closed.add(state)
        expanded += 1
        if state[1] == inst.targets:
            return _reconstruct(parents, state), expanded, True
        g = g_cost[state]
        for m, nxt in _successors(inst, state):
            ng = g + 1
            if nxt in closed or g_cost.get(nxt, ng + 1) <= ng:
                continue
            g_cost[nxt] = ng
            parents[nxt] = (state, m)
            counter += 1
            heapq.heappush(heap, (ng + _heuristic(inst, nxt[1]), counter, nxt))
    return None, expanded, True


def replay_moves(inst: SokobanInstance, moves) -> State:
    """Apply a move sequence from the instance's start state; illegal moves raise."""
    player, crates = inst.player, inst.crates
    for name in moves:
        dx, dy = MOVES[MOVE_NAMES.index(name)]
        step = (player[0] + dx, player[1] + dy)
        if inst.blocked(step):
            raise ValueError(f"move {name} walks into a wall at {step}")
        if step in crates:
            dest = (step[0] + dx, step[1] + dy)
            if inst.blocked(dest) or dest in crates:
                raise ValueError(f"move {name} pushes a crate into a blocked cell {dest}")
            crates = crates - {step} | {dest}
        player = step
    return player, crates


def solve_instance(inst: SokobanInstance, node_limit: int = 5000) -> Optional[SokobanSolution]:
    """Solve a parsed instance; the node budget applies to each phase separately."""
    if node_limit < 1:
        raise ValueError(f"node_limit must be >= 1, got {node_limit}")
    if any(_corner_dead(inst, c) for c in inst.crates):
        return None
    moves, expanded, conclusive = _bfs_phase(inst, node_limit)
    if moves is None and not conclusive:
        moves, astar_expanded, conclusive = _astar_phase(inst, node_limit)
        expanded += astar_expanded
    if moves is None:
        return None
    _, final_crates = replay_moves(inst, moves)
    assert final_crates == inst.targets, "solver returned a move sequence that misses the goal"
    return SokobanSolution(moves=moves, length=len(moves), nodes_expanded=expanded)


def solve_sokoban(level: Level, node_limit: int = 5000) -> Optional[SokobanSolution]:
    """Solve a Sokoban level within the node budget; None when no solution was found.

    None covers both outcomes the caller cannot distinguish by construction:
    the state space was exhausted without a goal, or both search phases ran
    out of budget.
    """
    return solve_instance(instance_from_level(level), node_limit)
