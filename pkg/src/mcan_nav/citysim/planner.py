"""Distance-transform route planning on 8-connected occupancy grids."""
from __future__ import annotations

import math

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from ..errors import InputError, PlanningError
from .grid import OccupancyGrid

SQRT2 = math.sqrt(2.0)
NEIGHBOURS = ((1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (-1, -1), (1, -1))
_EIGHT = np.ones((3, 3), dtype=bool)


def step_cost(a, b) -> float:
    return SQRT2 if a[0] != b[0] and a[1] != b[1] else 1.0


def path_cost(path) -> float:
    return float(sum(step_cost(a, b) for a, b in zip(path[:-1], path[1:])))


class RouteGraph:
    """Traversable cells of a grid as an undirected weighted graph, built once per grid."""

    def __init__(self, grid: OccupancyGrid):
        self.grid = grid
        mask = grid.traversable
        self.index = np.full(mask.shape, -1, dtype=np.int64)
        cells = np.argwhere(mask)
        self.cells = cells
        self.index[mask] = np.arange(len(cells))
        rows, cols, weights = [], [], []
        w, h = mask.shape
        for dx, dy, cost in ((1, 0, 1.0), (0, 1, 1.0), (1, 1, SQRT2), (1, -1, SQRT2)):
            xs = slice(0, w - dx)
            ys = slice(max(0, -dy), h - max(0, dy))
            xt = slice(dx, w)
            yt = slice(max(0, dy), h - max(0, -dy))
            both = mask[xs, ys] & mask[xt, yt]
            a = self.index[xs, ys][both]
            b = self.index[xt, yt][both]
            rows.append(a)
            cols.append(b)
            weights.append(np.full(len(a), cost))
        n = len(cells)
        self.matrix = coo_matrix(
            (np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        ).tocsr()

    def _node(self, cell, role: str) -> int:
        cell = (int(cell[0]), int(cell[1]))
        if not self.grid.in_bounds(cell):
            raise InputError(f"{role} {cell} lies outside the {self.grid.width}x{self.grid.height} grid")
        node = self.index[cell]
        if node < 0:
            raise InputError(f"{role} {cell} is a blocked cell")
        return int(node)

    def distance_transform(self, goal) -> np.ndarray:
        """Shortest 8-connected distance (cells) from every cell to ``goal``; inf if blocked or unreachable."""
        node = self._node(goal, "goal")
        dist = dijkstra(self.matrix, directed=False, indices=node)
        field = np.full(self.grid.speeds.shape, np.inf)
        field[tuple(self.cells.T)] = dist
        return field

    def plan(self, start, goal) -> list[tuple[int, int]]:
        """Optimal cell path from ``start`` to ``goal`` by descending the distance transform."""
        self._node(start, "start")
        field = self.distance_transform(goal)
        current = (int(start[0]), int(start[1]))
        if not math.isfinite(field[current]):
            raise PlanningError(f"goal {tuple(goal)} is unreachable from start {current}")
        path = [current]
        goal = (int(goal[0]), int(goal[1]))
        while current != goal:
            best, best_total = None, math.inf
            for dx, dy in NEIGHBOURS:
                nb = (current[0] + dx, current[1] + dy)
                if not self.grid.in_bounds(nb) or not math.isfinite(field[nb]):
                    continue
                total = step_cost(current, nb) + field[nb]
                if total < best_total:
                    best, best_total = nb, total
            current = best
            path.append(current)
        return path


def plan_route(grid: OccupancyGrid, start, goal, graph: RouteGraph | None = None) -> list[tuple[int, int]]:
    return (graph or RouteGraph(grid)).plan(start, goal)


def sample_endpoints(grid: OccupancyGrid, rng: np.random.Generator, max_tries: int = 100, min_separation: float = 0.0):
    """Distinct traversable cells in the same 8-connected component, drawn uniformly.

    ``min_separation`` (cells, straight line) rejects pairs that are too close.
    """
    mask = grid.traversable
    cells = np.argwhere(mask)
    if len(cells) < 2:
        raise PlanningError("fewer than two traversable cells")
    labels, _ = ndimage.label(mask, structure=_EIGHT)
    for _ in range(max_tries):
        start = cells[rng.integers(len(cells))]
        same = cells[labels[tuple(cells.T)] == labels[tuple(start)]]
        same = same[np.any(same != start, axis=1)]
        if min_separation > 0:
            same = same[np.hypot(*(same - start).T) >= min_separation]
        if len(same):
            goal = same[rng.integers(len(same))]
            return (int(start[0]), int(start[1])), (int(goal[0]), int(goal[1]))
    raise PlanningError(f"no connected endpoint pair found in {max_tries} tries")
