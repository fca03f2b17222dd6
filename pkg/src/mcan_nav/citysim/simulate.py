"""Batch generation of city tracks: random endpoints, planned routes, driven trajectories."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..datasets import TrajectoryDataset
from ..errors import McanError, TraversalTimeout
from .grid import OccupancyGrid
from .planner import RouteGraph, sample_endpoints
from .vehicle import VehicleConfig, traverse

log = logging.getLogger(__name__)


@dataclass
class SimulationResult:
    tracks: list[TrajectoryDataset] = field(default_factory=list)
    failures: list[tuple[int, str]] = field(default_factory=list)

    @property
    def total_distance(self) -> float:
        return float(sum(track.total_distance for track in self.tracks))


def simulate_tracks(
    grid: OccupancyGrid,
    n_tracks: int,
    seed: int = 0,
    vehicle: VehicleConfig = VehicleConfig(),
    dt: float = 1.0,
    min_separation_m: float = 0.0,
    prefix: str = "track",
) -> SimulationResult:
    """Drive ``n_tracks`` independent routes; track ``i`` draws from its own child seed.

    A failing track is recorded in ``failures`` and the rest still run.
    """
    result = SimulationResult()
    if n_tracks <= 0:
        return result
    graph = RouteGraph(grid)
    children = np.random.SeedSequence(seed).spawn(n_tracks)
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        name = f"{prefix}_{i:03d}"
        try:
            start, goal = sample_endpoints(grid, rng, min_separation=min_separation_m / grid.resolution)
            path = graph.plan(start, goal)
            result.tracks.append(traverse(path, grid, vehicle, dt=dt, name=name))
        except TraversalTimeout as exc:
            log.warning("%s: %s", name, exc)
            result.failures.append((i, str(exc)))
        except McanError as exc:
            log.warning("%s failed: %s", name, exc)
            result.failures.append((i, str(exc)))
    return result
