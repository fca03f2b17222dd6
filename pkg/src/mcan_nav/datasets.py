"""Trajectory datasets: in-memory form, CSV round trips and KITTI ingestion.

Motion convention shared by the simulator, the KITTI loader and the tracker:
sample ``k >= 1`` covers ``dt = t[k] - t[k-1]``; the heading is turned first,
then the agent moves ``v[k] * dt`` along the new heading. Sample 0 only
carries the start pose.

CSV schemas (UTF-8, comma separated, one header row)::

    dataset   t,v,omega,gt_x,gt_y,gt_theta   (s, m/s, rad/s, m, m, rad)
    estimate  t,x,y,theta                    (s, m, m, degrees)
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataFormatError, InputError
from .multiscale import PoseEstimate

DATASET_COLUMNS = ("t", "v", "omega", "gt_x", "gt_y", "gt_theta")
ESTIMATE_COLUMNS = ("t", "x", "y", "theta")
KITTI_FRAME_DT = 0.1


@dataclass
class TrajectoryDataset:
    t: np.ndarray
    v: np.ndarray
    omega: np.ndarray
    gt_x: np.ndarray
    gt_y: np.ndarray
    gt_theta: np.ndarray
    name: str = ""

    def __post_init__(self):
        for column in DATASET_COLUMNS:
            setattr(self, column, np.asarray(getattr(self, column), dtype=float).reshape(-1))
        lengths = {len(getattr(self, c)) for c in DATASET_COLUMNS}
        if len(lengths) != 1:
            raise InputError(f"dataset columns differ in length: {lengths}")
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise InputError("dataset timestamps must increase strictly")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def dt(self) -> float:
        return float(np.median(np.diff(self.t))) if len(self) > 1 else 1.0

    @property
    def total_distance(self) -> float:
        """Distance implied by the speed samples, ``sum(v * dt)``."""
        if len(self) < 2:
            return 0.0
        return float(np.sum(self.v[1:] * np.diff(self.t)))

    @property
    def path_length(self) -> float:
        """Length of the ground-truth polyline."""
        return float(np.hypot(np.diff(self.gt_x), np.diff(self.gt_y)).sum())

    @property
    def truth_xy(self) -> np.ndarray:
        return np.column_stack([self.gt_x, self.gt_y])

    def samples(self):
        return zip(self.t.tolist(), self.v.tolist(), self.omega.tolist())

    def initial_pose(self) -> PoseEstimate:
        return PoseEstimate(float(self.gt_x[0]), float(self.gt_y[0]), math.degrees(self.gt_theta[0]) % 360.0, float(self.t[0]))

    def reintegrate(self) -> np.ndarray:
        """Poses obtained by integrating the recorded ``(v, omega)``; shape (N, 3)."""
        if not len(self):
            return np.zeros((0, 3))
        return integrate_motion(self.t, self.v, self.omega, self.gt_x[0], self.gt_y[0], self.gt_theta[0])


def integrate_motion(t, v, omega, x0=0.0, y0=0.0, theta0=0.0) -> np.ndarray:
    """Exact discrete integration of the shared motion convention."""
    t, v, omega = (np.asarray(a, dtype=float) for a in (t, v, omega))
    out = np.empty((len(t), 3))
    x, y, theta = float(x0), float(y0), float(theta0)
    if len(t):
        out[0] = x, y, theta
    for k in range(1, len(t)):
        dt = t[k] - t[k - 1]
        theta += omega[k] * dt
        x += v[k] * dt * math.cos(theta)
        y += v[k] * dt * math.sin(theta)
        out[k] = x, y, theta
    return out


def motion_from_poses(t, x, y, yaw) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Differentiate planar poses into ``(v, omega, heading)``.

    The heading follows the direction of travel so that re-integrating
    ``(v, omega)`` reproduces the positions; while stationary it follows
    ``yaw``. The start heading is extrapolated from the first two moves.
    """
    t, x, y, yaw = (np.asarray(a, dtype=float) for a in (t, x, y, yaw))
    n = len(t)
    v, omega, heading = np.zeros(n), np.zeros(n), np.zeros(n)
    if n == 0:
        return v, omega, heading
    dx, dy = np.diff(x), np.diff(y)
    chord = np.hypot(dx, dy)
    moving = chord > 1e-9
    directions = np.arctan2(dy, dx)

    moves = np.flatnonzero(moving)
    start = float(yaw[0])
    if len(moves) >= 2 and moves[1] == moves[0] + 1 and moves[0] == 0:
        start = directions[0] - _wrap(directions[1] - directions[0])
    elif len(moves) >= 1 and moves[0] == 0:
        start = directions[0]
    heading[0] = start
    for k in range(1, n):
        dt = t[k] - t[k - 1]
        if moving[k - 1]:
            turn = _wrap(directions[k - 1] - heading[k - 1])
            v[k] = chord[k - 1] / dt
        else:
            turn = _wrap(yaw[k] - yaw[k - 1])
        omega[k] = turn / dt
        heading[k] = heading[k - 1] + turn
    return v, omega, heading


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def dataset_from_poses(t, x, y, yaw, name: str = "") -> TrajectoryDataset:
    v, omega, heading = motion_from_poses(t, x, y, yaw)
    return TrajectoryDataset(t, v, omega, x, y, heading, name=name)


def load_kitti_poses(path, frame_dt: float = KITTI_FRAME_DT, name: str | None = None) -> TrajectoryDataset:
    """Read a KITTI odometry ground-truth file (12 values per row, 3x4 row-major).

    Camera axes are x right, y down, z forward; the planar frame uses
    forward ``z`` as x and ``-x`` as y. Altitude is dropped.
    """
    path = Path(path)
    rows = []
    with path.open() as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 12:
                raise DataFormatError(f"{path}: row {number} has {len(parts)} values, expected 12")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise DataFormatError(f"{path}: row {number} contains a non-numeric value") from None
    poses = np.array(rows, dtype=float).reshape(-1, 3, 4)
    x = poses[:, 2, 3]
    y = -poses[:, 0, 3]
    yaw = np.arctan2(-poses[:, 0, 2], poses[:, 2, 2])
    t = np.arange(len(poses)) * frame_dt
    return dataset_from_poses(t, x, y, yaw, name=name or path.stem)


def _format(value: float) -> str:
    return repr(float(value))


def write_dataset(dataset: TrajectoryDataset, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(DATASET_COLUMNS)
        for row in zip(*(getattr(dataset, c) for c in DATASET_COLUMNS)):
            writer.writerow([_format(v) for v in row])


def _read_columns(path, columns: Sequence[str]) -> dict[str, np.ndarray]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise DataFormatError(f"{path}: empty file, expected header {','.join(columns)}")
        header = [h.strip() for h in header]
        missing = [c for c in columns if c not in header]
        if missing:
            raise DataFormatError(f"{path}: missing column(s) {', '.join(missing)}")
        index = {c: header.index(c) for c in columns}
        data = {c: [] for c in columns}
        for row_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(f"{path}: row {row_number} has {len(row)} fields, expected {len(header)}")
            for c in columns:
                try:
                    data[c].append(float(row[index[c]]))
                except ValueError:
                    raise DataFormatError(f"{path}: row {row_number}, column {c}: not a number ({row[index[c]]!r})") from None
    return {c: np.array(v, dtype=float) for c, v in data.items()}


def read_dataset(path) -> TrajectoryDataset:
    columns = _read_columns(path, DATASET_COLUMNS)
    try:
        return TrajectoryDataset(**columns, name=Path(path).stem)
    except InputError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def write_estimates(poses: Sequence[PoseEstimate], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(ESTIMATE_COLUMNS)
        for pose in poses:
            writer.writerow([_format(pose.t), _format(pose.x), _format(pose.y), _format(pose.theta)])


def read_estimates(path) -> list[PoseEstimate]:
    columns = _read_columns(path, ESTIMATE_COLUMNS)
    return [PoseEstimate(x, y, theta, t) for t, x, y, theta in zip(columns["t"], columns["x"], columns["y"], columns["theta"])]
