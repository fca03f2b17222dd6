"""City-scale trajectory simulator: OSM roads, occupancy grid, planner, bicycle model."""
from .grid import OccupancyGrid, rasterize
from .osm import RoadNetwork, RoadSegment, parse_osm, synthetic_city_osm
from .planner import RouteGraph, plan_route, sample_endpoints
from .simulate import SimulationResult, simulate_tracks
from .vehicle import BicycleState, VehicleConfig, traverse

__all__ = [
    "BicycleState",
    "OccupancyGrid",
    "RoadNetwork",
    "RoadSegment",
    "RouteGraph",
    "SimulationResult",
    "VehicleConfig",
    "parse_osm",
    "plan_route",
    "rasterize",
    "sample_endpoints",
    "simulate_tracks",
    "synthetic_city_osm",
    "traverse",
]
