"""8-connected A* over the occupancy grid with octile costs, plus the
shortest-path length used by the optimality oracle."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .errors import NoPathExists
from .world import OccupancyGrid

SQRT2 = math.sqrt(2.0)

_NEIGHBORS = (
    (-1, -1, SQRT2), (-1, 0, 1.0), (-1, 1, SQRT2),
    (0, -1, 1.0), (0, 1, 1.0),
    (1, -1, SQRT2), (1, 0, 1.0), (1, 1, SQRT2),
)


@dataclass(frozen=True)
class GridPath:
    cells: tuple[tuple[int, int], ...]
    length: float  # meters


def octile(a: tuple[int, int], b: tuple[int, int]) -> float:
    """Admissible heuristic for 8-connected movement, in cell units."""
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    return (dx + dy) + (SQRT2 - 2.0) * min(dx, dy)


def astar_shortest_path(grid: OccupancyGrid, start_cell: tuple[int, int],
                        goal_cell: tuple[int, int]) -> GridPath:
    """Cost-optimal 8-connected path; diagonal steps are forbidden when
    either adjacent orthogonal cell is occupied (no corner cutting). Ties
    break by lexicographic cell order for determinism."""
    for name, cell in (("start", start_cell), ("goal", goal_cell)):
        if not grid.in_grid(*cell):
            raise ValueError(f"{name} cell {cell} outside grid")
        if grid.occupied(*cell):
            raise NoPathExists(f"{name} cell {cell} is occupied")

    open_heap: list[tuple[float, tuple[int, int]]] = [
        (octile(start_cell, goal_cell), start_cell)]
    g_score = {start_cell: 0.0}
    came_from: dict[tuple[int, int], tuple[int, int]] = {}
    closed: set[tuple[int, int]] = set()

    while open_heap:
        _, current = heapq.heappop(open_heap)
        if current in closed:
            continue
        if current == goal_cell:
            cells = [current]
            while cells[-1] != start_cell:
                cells.append(came_from[cells[-1]])
            cells.reverse()
            return GridPath(cells=tuple(cells),
                            length=g_score[current] * grid.cell_size)
        closed.add(current)
        cx, cy = current
        for dx, dy, cost in _NEIGHBORS:
            nx, ny = cx + dx, cy + dy
            if not grid.in_grid(nx, ny) or grid.occupied(nx, ny):
                continue
            if dx != 0 and dy != 0 and (grid.occupied(cx + dx, cy)
                                        or grid.occupied(cx, cy + dy)):
                continue
            tentative = g_score[current] + cost
            if tentative < g_score.get((nx, ny), math.inf):
                g_score[(nx, ny)] = tentative
                came_from[(nx, ny)] = current
                heapq.heappush(open_heap,
                               (tentative + octile((nx, ny), goal_cell), (nx, ny)))

    raise NoPathExists(f"no free path from {start_cell} to {goal_cell}")
