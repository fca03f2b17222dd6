"""Occupancy grids of road speeds and their PGM + JSON artifact."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, DataFormatError
from .osm import MAX_ROAD_SPEED, RoadNetwork

DEFAULT_RESOLUTION = 10.0
MAX_CELLS = 10**8


@dataclass
class OccupancyGrid:
    """Cell ``(ix, iy)`` covers ``origin + [ix, ix+1) * resolution`` (same for y).

    ``speeds[ix, iy]`` is the drivable speed in m/s; 0 marks a blocked cell.
    """

    resolution: float
    origin: tuple[float, float]
    speeds: np.ndarray

    @property
    def width(self) -> int:
        return self.speeds.shape[0]

    @property
    def height(self) -> int:
        return self.speeds.shape[1]

    @property
    def traversable(self) -> np.ndarray:
        return self.speeds > 0

    def in_bounds(self, cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        ix = int(np.floor((x - self.origin[0]) / self.resolution))
        iy = int(np.floor((y - self.origin[1]) / self.resolution))
        return min(max(ix, 0), self.width - 1), min(max(iy, 0), self.height - 1)

    def center_of(self, cell) -> tuple[float, float]:
        return (
            self.origin[0] + (cell[0] + 0.5) * self.resolution,
            self.origin[1] + (cell[1] + 0.5) * self.resolution,
        )

    def speed_at(self, x: float, y: float) -> float:
        return float(self.speeds[self.cell_of(x, y)])

    def save(self, path) -> tuple[Path, Path]:
        """Write ``path`` as a binary PGM (north up) and ``path.json`` with the decoding table."""
        path = Path(path)
        levels = np.unique(self.speeds[self.speeds > 0])
        if len(levels) > 255:
            # quantise to 255 evenly spaced speeds
            levels = np.linspace(levels.min(), levels.max(), 255)
        gray = np.zeros(self.speeds.shape, dtype=np.uint8)
        drivable = self.speeds > 0
        gray[drivable] = 1 + np.abs(self.speeds[drivable, None] - levels[None, :]).argmin(axis=1)
        image = gray.T[::-1]
        with path.open("wb") as handle:
            handle.write(f"P5\n{self.width} {self.height}\n255\n".encode("ascii"))
            handle.write(image.tobytes())
        sidecar = path.with_name(path.name + ".json")
        sidecar.write_text(json.dumps({
            "resolution_m": self.resolution,
            "origin_m": list(self.origin),
            "width": self.width,
            "height": self.height,
            "gray_to_speed_mps": {str(k + 1): float(v) for k, v in enumerate(levels)},
            "blocked_gray": 0,
        }, indent=2), encoding="utf-8")
        return path, sidecar

    @classmethod
    def load(cls, path) -> "OccupancyGrid":
        path = Path(path)
        sidecar = json.loads(path.with_name(path.name + ".json").read_text(encoding="utf-8"))
        data = path.read_bytes()
        # header is four whitespace-separated tokens then exactly one whitespace byte
        tokens, offset = [], 0
        while len(tokens) < 4:
            while offset < len(data) and data[offset : offset + 1].isspace():
                offset += 1
            start = offset
            while offset < len(data) and not data[offset : offset + 1].isspace():
                offset += 1
            if start == offset:
                raise DataFormatError(f"{path}: truncated PGM header")
            tokens.append(data[start:offset])
        if tokens[0] != b"P5":
            raise DataFormatError(f"{path}: not a binary PGM")
        width, height = int(tokens[1]), int(tokens[2])
        pixels = data[offset + 1 : offset + 1 + width * height]
        if len(pixels) != width * height:
            raise DataFormatError(f"{path}: expected {width * height} pixels, found {len(pixels)}")
        image = np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)
        table = np.zeros(256)
        for key, value in sidecar["gray_to_speed_mps"].items():
            table[int(key)] = value
        speeds = table[image[::-1].T]
        return cls(float(sidecar["resolution_m"]), tuple(sidecar["origin_m"]), speeds)


def bresenham(a: tuple[int, int], b: tuple[int, int]) -> list[tuple[int, int]]:
    """Cells of the 8-connected line from ``a`` to ``b``, both ends included."""
    x0, y0 = a
    x1, y1 = b
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx, sy = (1 if x1 >= x0 else -1), (1 if y1 >= y0 else -1)
    err = dx + dy
    cells = []
    while True:
        cells.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return cells
        twice = 2 * err
        if twice >= dy:
            err += dy
            x0 += sx
        if twice <= dx:
            err += dx
            y0 += sy


def rasterize(network: RoadNetwork, resolution: float = DEFAULT_RESOLUTION) -> OccupancyGrid:
    """Burn each road polyline into a grid covering the network's bounding box; max speed wins."""
    if not resolution > 0:
        raise ConfigurationError(f"resolution must be positive, got {resolution}")
    xmin, ymin, xmax, ymax = network.bbox
    width = max(1, int(np.ceil((xmax - xmin) / resolution - 1e-9)))
    height = max(1, int(np.ceil((ymax - ymin) / resolution - 1e-9)))
    if width * height > MAX_CELLS:
        raise ConfigurationError(f"{width}x{height} cells exceeds the {MAX_CELLS} cell limit; use a coarser resolution")
    grid = OccupancyGrid(float(resolution), (float(xmin), float(ymin)), np.zeros((width, height)))
    for segment in network.segments:
        speed = min(float(segment.speed), MAX_ROAD_SPEED)
        vertices = [grid.cell_of(x, y) for x, y in segment.points]
        for a, b in zip(vertices[:-1], vertices[1:]):
            for cell in bresenham(a, b):
                if grid.speeds[cell] < speed:
                    grid.speeds[cell] = speed
    return grid
