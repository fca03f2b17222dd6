"""OSM XML extracts to drivable road polylines in local metres."""
from __future__ import annotations

import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataFormatError, InputError

EARTH_RADIUS = 6_371_008.8
REGION_SIZE = 10_000.0
MAX_ROAD_SPEED = 20.0
KMH = 1000.0 / 3600.0
MPH = 1609.344 / 3600.0

# m/s; highway=*_link inherits its parent class
DEFAULT_SPEEDS = {
    "motorway": 27.8,
    "trunk": 25.0,
    "primary": 16.7,
    "secondary": 13.9,
    "tertiary": 11.1,
    "unclassified": 8.3,
    "residential": 8.3,
    "service": 5.6,
    "living_street": 2.8,
}


@dataclass(frozen=True)
class RoadSegment:
    points: np.ndarray  # (K, 2) metres
    road_class: str
    speed: float  # m/s


@dataclass
class RoadNetwork:
    segments: list[RoadSegment]
    bbox: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax in metres
    origin_latlon: tuple[float, float] = (0.0, 0.0)
    speed_table: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_SPEEDS))

    @property
    def total_length(self) -> float:
        return float(sum(np.hypot(*np.diff(s.points, axis=0).T).sum() for s in self.segments))


def road_class(tags: dict[str, str]) -> str | None:
    """Drivable class of a way, or None for paths, footways and the like."""
    highway = tags.get("highway")
    if highway is None:
        return None
    base = highway[:-5] if highway.endswith("_link") else highway
    return base if base in DEFAULT_SPEEDS else None


def parse_maxspeed(value: str | None) -> float | None:
    """OSM ``maxspeed`` to m/s; bare numbers are km/h. Unparseable values give None."""
    if not value:
        return None
    match = re.match(r"\s*([0-9]+(?:\.[0-9]+)?)\s*(mph|km/h|kmh|kph)?", value.split(";")[0].lower())
    if not match:
        return None
    number = float(match.group(1))
    if number <= 0:
        return None
    return number * (MPH if match.group(2) == "mph" else KMH)


def road_speed(tags: dict[str, str]) -> float:
    cls = road_class(tags)
    speed = parse_maxspeed(tags.get("maxspeed")) or DEFAULT_SPEEDS[cls]
    return min(speed, MAX_ROAD_SPEED)


def _clip_edge(p, q, lo, hi):
    """Liang-Barsky clip of segment p->q to the box; returns the clipped pair or None."""
    t0, t1 = 0.0, 1.0
    d = q - p
    for axis in range(2):
        for edge, sign in ((lo[axis], -1.0), (hi[axis], 1.0)):
            denom = sign * d[axis]
            dist = sign * (edge - p[axis])
            if denom == 0:
                if dist < 0:
                    return None
                continue
            t = dist / denom
            if denom < 0:
                t0 = max(t0, t)
            else:
                t1 = min(t1, t)
    if t0 > t1:
        return None
    return p + t0 * d, p + t1 * d


def clip_polyline(points: np.ndarray, lo, hi) -> list[np.ndarray]:
    """Pieces of a polyline lying inside the axis-aligned box ``[lo, hi]``."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    pieces, current = [], []
    for p, q in zip(points[:-1], points[1:]):
        clipped = _clip_edge(p, q, lo, hi)
        if clipped is None:
            if len(current) > 1:
                pieces.append(np.array(current))
            current = []
            continue
        a, b = clipped
        if current and np.allclose(current[-1], a):
            current.append(b)
        else:
            if len(current) > 1:
                pieces.append(np.array(current))
            current = [a, b]
        if not np.allclose(b, q):
            pieces.append(np.array(current))
            current = []
    if len(current) > 1:
        pieces.append(np.array(current))
    return pieces


def parse_osm(source, center: tuple[float, float] | None = None, region_size: float = REGION_SIZE) -> RoadNetwork:
    """Drivable ways of an OSM XML document as metre polylines cropped to a square region.

    ``source`` is a path or the XML text itself. The equirectangular
    projection is centred on ``center`` (lat, lon), by default the middle of
    the drivable nodes' extent.
    """
    try:
        if isinstance(source, bytes) or (isinstance(source, str) and source.lstrip().startswith("<")):
            root = ET.fromstring(source)
        else:
            root = ET.parse(Path(source)).getroot()
    except ET.ParseError as exc:
        line, column = exc.position
        raise DataFormatError(f"malformed OSM XML at line {line}, column {column}: {exc}") from None

    nodes = {}
    for node in root.iter("node"):
        try:
            nodes[node.get("id")] = (float(node.get("lat")), float(node.get("lon")))
        except (TypeError, ValueError):
            raise DataFormatError(f"node {node.get('id')!r} lacks numeric lat/lon") from None

    ways = []
    for way in root.iter("way"):
        tags = {tag.get("k"): tag.get("v") for tag in way.iter("tag")}
        cls = road_class(tags)
        if cls is None:
            continue
        refs = [nd.get("ref") for nd in way.iter("nd") if nd.get("ref") in nodes]
        if len(refs) >= 2:
            ways.append((cls, road_speed(tags), [nodes[r] for r in refs]))
    if not ways:
        raise InputError("no drivable ways in the OSM document")

    if center is None:
        coords = np.array([p for _, _, pts in ways for p in pts])
        center = tuple((coords.min(axis=0) + coords.max(axis=0)) / 2.0)
    lat0, lon0 = center
    cos0 = math.cos(math.radians(lat0))
    half = region_size / 2.0
    lo, hi = (-half, -half), (half, half)

    segments = []
    for cls, speed, latlon in ways:
        ll = np.radians(np.array(latlon))
        xy = np.column_stack([
            EARTH_RADIUS * (ll[:, 1] - math.radians(lon0)) * cos0,
            EARTH_RADIUS * (ll[:, 0] - math.radians(lat0)),
        ])
        segments.extend(RoadSegment(piece, cls, speed) for piece in clip_polyline(xy, lo, hi))
    if not segments:
        raise InputError("no drivable ways inside the region")
    return RoadNetwork(segments, (-half, -half, half, half), (lat0, lon0))


def synthetic_city_osm(seed: int = 0, size: float = REGION_SIZE, block: float = 500.0, lat0: float = 52.52, lon0: float = 13.405) -> str:
    """OSM XML for a seeded street grid with mixed road classes and two diagonal avenues.

    Stands in for a downloaded extract in tests and demos.
    """
    rng = np.random.default_rng(seed)
    cos0 = math.cos(math.radians(lat0))
    half = size / 2.0 * 0.98

    def latlon(x: float, y: float) -> tuple[float, float]:
        return lat0 + math.degrees(y / EARTH_RADIUS), lon0 + math.degrees(x / (EARTH_RADIUS * cos0))

    lines = ['<?xml version="1.0" encoding="UTF-8"?>', '<osm version="0.6" generator="mcan_nav">']
    way_lines = []
    next_id = [1]

    def add_way(points, tags):
        refs = []
        for x, y in points:
            lat, lon = latlon(x, y)
            lines.append(f'  <node id="{next_id[0]}" lat="{lat:.8f}" lon="{lon:.8f}"/>')
            refs.append(next_id[0])
            next_id[0] += 1
        way_lines.append(f'  <way id="{next_id[0]}">')
        next_id[0] += 1
        way_lines.extend(f'    <nd ref="{r}"/>' for r in refs)
        way_lines.extend(f'    <tag k="{k}" v="{v}"/>' for k, v in tags.items())
        way_lines.append("  </way>")

    ticks = np.arange(-half, half + 1e-9, block)
    classes = ["residential", "residential", "tertiary", "secondary", "primary"]
    for k, c in enumerate(ticks):
        cls = "motorway" if k == len(ticks) // 2 else classes[int(rng.integers(len(classes)))]
        tags = {"highway": cls}
        if rng.random() < 0.3:
            tags["maxspeed"] = str(int(rng.choice([30, 50, 60, 70])))
        add_way([(x, c) for x in ticks], tags)
        add_way([(c, y) for y in ticks], {"highway": classes[int(rng.integers(len(classes)))]})
    add_way([(-half, -half), (half, half)], {"highway": "primary", "maxspeed": "60"})
    add_way([(-half, half), (half, -half)], {"highway": "secondary"})
    add_way([(0.0, 0.0), (block / 2, block / 3)], {"highway": "footway"})
    return "\n".join(lines + way_lines + ["</osm>"]) + "\n"
