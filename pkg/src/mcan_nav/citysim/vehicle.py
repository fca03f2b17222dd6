"""Bicycle-model vehicle following a planned cell path with pure pursuit.

The integration matches the dataset motion convention exactly (heading
first, then position), so re-integrating the recorded ``(v, omega)``
reproduces the recorded poses up to float rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..datasets import TrajectoryDataset
from ..errors import ConfigurationError, InputError, TraversalTimeout
from .grid import OccupancyGrid


@dataclass(frozen=True)
class VehicleConfig:
    wheelbase: float = 2.5  # m
    max_accel: float = 2.0  # m/s^2
    max_steer: float = 0.6  # rad
    lookahead_cells: float = 3.0
    max_turn_per_step: float = math.radians(90.0)
    max_steps: int | None = None

    def __post_init__(self):
        if not (self.wheelbase > 0 and self.max_accel > 0 and 0 < self.max_steer < math.pi / 2 and self.lookahead_cells > 0):
            raise ConfigurationError(f"invalid vehicle configuration {self}")


@dataclass
class BicycleState:
    x: float
    y: float
    theta: float
    v: float = 0.0

    def advance(self, v: float, steer: float, dt: float, wheelbase: float) -> float:
        """Apply one step and return the yaw rate used."""
        if v < 0:
            raise InputError(f"speed must be nonnegative, got {v}")
        omega = v / wheelbase * math.tan(steer)
        self.theta += omega * dt
        self.x += v * dt * math.cos(self.theta)
        self.y += v * dt * math.sin(self.theta)
        self.v = v
        return omega


def speed_profile(limits: np.ndarray, spacing: np.ndarray, max_accel: float, final: float) -> np.ndarray:
    """Backward pass so the vehicle can always brake at ``max_accel`` into slower cells."""
    profile = limits.astype(float).copy()
    profile[-1] = min(profile[-1], final)
    for i in range(len(profile) - 2, -1, -1):
        profile[i] = min(profile[i], math.sqrt(profile[i + 1] ** 2 + 2.0 * max_accel * spacing[i]))
    return profile


def traverse(path, grid: OccupancyGrid, config: VehicleConfig = VehicleConfig(), dt: float = 1.0, name: str = "") -> TrajectoryDataset:
    """Drive ``path`` (cell indices) and record ``(t, v, omega)`` with ground-truth poses.

    Stops once within one cell of the goal centre.

    Raises:
        TraversalTimeout: the goal was not reached within the step budget;
            ``partial`` holds the samples recorded so far.
    """
    if not len(path):
        raise InputError("path is empty")
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}")
    res = grid.resolution
    points = np.array([grid.center_of(c) for c in path])
    limits = np.array([grid.speeds[tuple(c)] for c in path])
    if np.any(limits <= 0):
        raise InputError("path crosses a blocked cell")
    spacing = np.hypot(*np.diff(points, axis=0).T) if len(points) > 1 else np.zeros(0)
    profile = speed_profile(limits, spacing, config.max_accel, final=config.max_accel * dt)
    cumulative = np.concatenate([[0.0], np.cumsum(spacing)])
    goal = points[-1]

    lookahead_min = config.lookahead_cells * res
    start_target = points[min(len(points) - 1, int(config.lookahead_cells))]
    heading = math.atan2(start_target[1] - points[0][1], start_target[0] - points[0][0]) if len(points) > 1 else 0.0
    state = BicycleState(float(points[0][0]), float(points[0][1]), heading)
    records = [(0.0, 0.0, 0.0, state.x, state.y, state.theta)]

    def dataset() -> TrajectoryDataset:
        return TrajectoryDataset(*np.array(records).T, name=name)

    budget = config.max_steps or max(1000, int(20 * cumulative[-1] / max(res, 1e-9)) + 100)
    progress = 0
    for k in range(1, budget + 1):
        if math.hypot(state.x - goal[0], state.y - goal[1]) <= res:
            return dataset()
        # progress along the path: nearest waypoint a short way ahead
        window = slice(progress, min(len(points), progress + int(math.ceil(state.v * dt / res)) + 4))
        local = np.hypot(points[window, 0] - state.x, points[window, 1] - state.y)
        progress = window.start + int(np.argmin(local))

        # speed: accelerate toward the slowest profile value over the cells this step can reach
        reach = int(math.ceil((state.v + config.max_accel * dt) * dt / res)) + 2
        cap = float(profile[max(0, progress - 1) : progress + reach].min())
        v = min(state.v + config.max_accel * dt, cap)

        # pure pursuit toward the first waypoint beyond the lookahead distance
        lookahead = max(lookahead_min, 1.5 * v * dt)
        ahead = np.flatnonzero(cumulative[progress:] - cumulative[progress] >= lookahead)
        target = points[progress + ahead[0]] if len(ahead) else goal
        dx, dy = target[0] - state.x, target[1] - state.y
        distance = max(math.hypot(dx, dy), 1e-9)
        alpha = (math.atan2(dy, dx) - state.theta + math.pi) % (2 * math.pi) - math.pi
        steer = math.atan(2.0 * config.wheelbase * math.sin(alpha) / distance)
        steer = max(-config.max_steer, min(config.max_steer, steer))
        if v > 0:
            # keep the per-step turn within what the heading ring can integrate
            limit = math.atan(config.max_turn_per_step * config.wheelbase / (v * dt))
            steer = max(-limit, min(limit, steer))
        omega = state.advance(v, steer, dt, config.wheelbase)
        records.append((k * dt, v, omega, state.x, state.y, state.theta))
    raise TraversalTimeout(f"goal not reached within {budget} steps", partial=dataset())
