"""Multiscale stack of 2D attractor sheets and the end-to-end tracker."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .attractor import AttractorNetwork, NetworkParams
from .errors import ConfigurationError, InputError, UndecodableError
from .heading import HeadDirectionNetwork

log = logging.getLogger(__name__)

DEFAULT_SCALES = (0.25, 1.0, 4.0, 16.0)
DEFAULT_SIZE = 100
SINGLE_SCALE_SIZE = 200
SINGLE_SCALE_RESOLUTION = 1.0
MAX_SPEED = 20.0
_TIE = 1e-12


@dataclass(frozen=True)
class PoseEstimate:
    x: float
    y: float
    theta: float  # degrees, [0, 360)
    t: float


def _degrees(angle: float) -> float:
    """Wrap to [0, 360); ``-1e-17 % 360`` rounds to 360 and is folded back."""
    value = angle % 360.0
    return 0.0 if value >= 360.0 else value


def select_scale(displacement: float, scales: Sequence[float]) -> int:
    """Index of the scale nearest ``displacement`` in log space; ties go to the finer scale."""
    if not scales:
        raise ConfigurationError("at least one scale is required")
    if displacement <= 0:
        return int(np.argmin(scales))
    target = math.log(displacement)
    best, best_gap = 0, math.inf
    for index, scale in enumerate(scales):
        gap = abs(target - math.log(scale))
        if gap < best_gap - _TIE or (abs(gap - best_gap) <= _TIE and scale < scales[best]):
            best, best_gap = index, gap
    return best


def update_wraparound(prev_idx: float, new_idx: float, heading: float, axis: str, n: int, scale: float) -> float:
    """Metres to add to a wraparound buffer after one decoded move.

    A jump of more than half the axis is a wrap: a drop in index while moving
    in the positive direction adds one network extent, a rise while moving
    negatively subtracts one. Per-step motion is under half the axis, so the
    jump itself fixes the direction; ``heading`` is only a cross-check and a
    disagreement (decode noise near an edge) is logged.
    """
    jump = new_idx - prev_idx
    if abs(jump) <= n / 2:
        return 0.0
    sign = 1.0 if jump < 0 else -1.0
    component = math.cos(math.radians(heading)) if axis == "x" else math.sin(math.radians(heading))
    if abs(component) > 1e-9 and math.copysign(1.0, component) != sign:
        log.debug("wrap on %s against heading %.2f; following the decoded jump", axis, heading)
    return sign * n * scale


class MultiscaleNetwork:
    """Parallel 2D attractor sheets with geometric spatial resolutions.

    Each tick the displacement is routed to the sheet whose scale (metres per
    neuron) is closest to the distance travelled; the remaining sheets only
    self-stabilise. Per-sheet wraparound buffers keep the decoded position
    continuous across torus edges.
    """

    def __init__(
        self,
        params: NetworkParams,
        scales: Sequence[float] = DEFAULT_SCALES,
        n: int = DEFAULT_SIZE,
        calibrate: bool = True,
        max_speed: float = MAX_SPEED,
    ):
        scales = tuple(float(s) for s in scales)
        if not scales or any(s <= 0 for s in scales) or any(b <= a for a, b in zip(scales, scales[1:])):
            raise ConfigurationError(f"scales must be positive and strictly increasing, got {scales}")
        self.scales = scales
        self.n = int(n)
        self.max_speed = max_speed
        self.networks = [AttractorNetwork((self.n, self.n), params, calibrate=calibrate) for _ in scales]
        self.origins = [net.decode() for net in self.networks]
        self.last_decoded = list(self.origins)
        self.wrap = np.zeros((len(scales), 2))
        self.usage = np.zeros(len(scales), dtype=int)
        self._warned = False

    @classmethod
    def single_scale(cls, params: NetworkParams, resolution: float = SINGLE_SCALE_RESOLUTION, n: int = SINGLE_SCALE_SIZE, **kwargs):
        """The equal-neuron single-sheet baseline (one 200x200 sheet by default)."""
        return cls(params, scales=(resolution,), n=n, **kwargs)

    @property
    def neuron_count(self) -> int:
        return sum(net.neuron_count for net in self.networks)

    @property
    def faults(self) -> int:
        return sum(net.faults for net in self.networks)

    def step(self, v: float, heading: float, dt: float) -> int:
        """Integrate speed ``v`` (m/s) along ``heading`` (degrees) for ``dt`` s; returns the sheet used."""
        if not 0.0 <= v <= self.max_speed:
            if not self._warned:
                log.warning("speed %.3f m/s outside [0, %.1f]; clamping", v, self.max_speed)
                self._warned = True
            v = min(max(v, 0.0), self.max_speed)
        distance = v * dt
        chosen = select_scale(distance, self.scales)
        self.usage[chosen] += 1
        theta = math.radians(heading)
        for j, (net, scale) in enumerate(zip(self.networks, self.scales)):
            if j == chosen:
                net.step(distance * math.cos(theta) / scale, distance * math.sin(theta) / scale)
            else:
                net.step(0.0, 0.0)
            new = net.decode()
            prev = self.last_decoded[j]
            self.wrap[j, 0] += update_wraparound(prev[0], new[0], heading, "x", self.n, scale)
            self.wrap[j, 1] += update_wraparound(prev[1], new[1], heading, "y", self.n, scale)
            self.last_decoded[j] = new
        return chosen

    def sheet_positions(self) -> np.ndarray:
        """Per-sheet decoded displacement in metres, shape (M, 2)."""
        out = np.empty((len(self.scales), 2))
        for j, scale in enumerate(self.scales):
            if not np.any(self.networks[j].activity > 0):
                raise UndecodableError(f"sheet with scale {scale} m/neuron has no activity")
            decoded, origin = self.last_decoded[j], self.origins[j]
            out[j] = [scale * (decoded[0] - origin[0]), scale * (decoded[1] - origin[1])]
        return out + self.wrap

    def decode(self) -> tuple[float, float]:
        x, y = self.sheet_positions().sum(axis=0)
        return float(x), float(y)


def track_trajectory(
    samples: Iterable[tuple[float, float, float]],
    initial: PoseEstimate,
    params: NetworkParams,
    hd_params: NetworkParams,
    scales: Sequence[float] = DEFAULT_SCALES,
    n: int = DEFAULT_SIZE,
    calibrate: bool = True,
    max_speed: float = MAX_SPEED,
) -> list[PoseEstimate]:
    """Dead-reckon a ``(t, v, omega)`` stream through the heading ring and the stack.

    The first sample only fixes the start time; every later sample moves the
    agent for ``t[k] - t[k-1]`` seconds, heading update first.
    """
    samples = list(samples)
    if not samples:
        return []
    stack = MultiscaleNetwork(params, scales=scales, n=n, calibrate=calibrate, max_speed=max_speed)
    hd = HeadDirectionNetwork(hd_params, initial_heading=initial.theta % 360.0, calibrate=calibrate)
    # the ring quantises its start; report headings relative to where it settled
    heading_offset = (initial.theta - hd.heading + 180.0) % 360.0 - 180.0

    out = [PoseEstimate(initial.x, initial.y, _degrees(initial.theta), samples[0][0])]
    previous_t = samples[0][0]
    for t, v, omega in samples[1:]:
        dt = t - previous_t
        if not dt > 0:
            raise InputError(f"timestamps must increase strictly (t={t} after {previous_t})")
        previous_t = t
        heading = _degrees(hd.step(omega, dt) + heading_offset)
        stack.step(v, heading, dt)
        x, y = stack.decode()
        out.append(PoseEstimate(initial.x + x, initial.y + y, heading, t))
    return out
