"""Trajectory metrics: rigid SE(2) alignment, ATE, SAD and segmented ATE.

Trajectories are ``(N, 2)`` arrays of metres. ``ate_per_meter`` divides by
the ground-truth path length.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError


def _pair(estimate, truth, minimum: int = 0) -> tuple[np.ndarray, np.ndarray]:
    est = np.asarray(estimate, dtype=float)
    ref = np.asarray(truth, dtype=float)
    if est.ndim != 2 or est.shape[1] != 2 or ref.ndim != 2 or ref.shape[1] != 2:
        raise InputError(f"trajectories must be (N, 2) arrays, got {est.shape} and {ref.shape}")
    if len(est) != len(ref):
        raise InputError(f"trajectory lengths differ: {len(est)} vs {len(ref)}")
    if len(est) < minimum:
        raise InputError(f"need at least {minimum} poses, got {len(est)}")
    return est, ref


def align_se2(estimate, truth) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares rotation ``R`` and translation ``t`` with ``R @ est + t ~ truth``.

    Coincident estimate points give the identity rotation and a centroid
    translation.
    """
    est, ref = _pair(estimate, truth, minimum=2)
    mu_e, mu_r = est.mean(axis=0), ref.mean(axis=0)
    de, dr = est - mu_e, ref - mu_r
    if not np.any(np.abs(de) > 1e-12):
        return np.eye(2), mu_r - mu_e
    h = de.T @ dr
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T)) or 1.0
    rotation = vt.T @ np.diag([1.0, d]) @ u.T
    return rotation, mu_r - rotation @ mu_e


def apply_se2(points, rotation: np.ndarray, translation: np.ndarray) -> np.ndarray:
    return np.asarray(points, dtype=float) @ rotation.T + translation


def ate(estimate, truth) -> float:
    """Root-mean-square point error after rigid alignment."""
    est, ref = _pair(estimate, truth)
    if len(est) < 2:
        return 0.0  # zero or one point aligns exactly
    rotation, translation = align_se2(est, ref)
    residual = apply_se2(est, rotation, translation) - ref
    return float(math.sqrt(np.mean(np.sum(residual**2, axis=1))))


def sad(estimate, truth) -> float:
    """Sum over steps of ``|dx| + |dy|`` with no alignment."""
    est, ref = _pair(estimate, truth)
    return float(np.abs(est - ref).sum())


def sad_heading(estimate_deg, truth_deg) -> float:
    """Sum of absolute circular heading differences in degrees."""
    est = np.asarray(estimate_deg, dtype=float)
    ref = np.asarray(truth_deg, dtype=float)
    if est.shape != ref.shape:
        raise InputError(f"heading sequences differ in shape: {est.shape} vs {ref.shape}")
    diff = (est - ref + 180.0) % 360.0 - 180.0
    return float(np.abs(diff).sum())


def path_length(truth) -> float:
    ref = np.asarray(truth, dtype=float)
    if len(ref) < 2:
        return 0.0
    return float(np.hypot(*np.diff(ref, axis=0).T).sum())


def segment_ate(estimate, truth, segment_length: float) -> list[float]:
    """ATE of consecutive pieces of roughly ``segment_length`` metres, each aligned on its own.

    The ground-truth length is split into ``max(1, floor(total / segment_length))``
    equal pieces by cumulative distance.
    """
    if not segment_length > 0:
        raise InputError(f"segment_length must be positive, got {segment_length}")
    est, ref = _pair(estimate, truth)
    if len(ref) < 2:
        return [0.0]
    cumulative = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(ref, axis=0).T))])
    total = cumulative[-1]
    count = max(1, int(total // segment_length))
    edges = np.linspace(0.0, total, count + 1)
    labels = np.clip(np.searchsorted(edges, cumulative, side="right") - 1, 0, count - 1)
    scores = []
    for k in range(count):
        members = np.flatnonzero(labels == k)
        scores.append(ate(est[members], ref[members]) if len(members) else 0.0)
    return scores


@dataclass
class MetricReport:
    label: str
    ate_m: float
    ate_per_meter: float
    sad: float
    distance_m: float
    segment_errors: list[float] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def evaluate(estimate, truth, label: str = "", segment_length: float | None = None) -> MetricReport:
    est, ref = _pair(estimate, truth)
    error = ate(est, ref)
    distance = path_length(ref)
    segments = segment_ate(est, ref, segment_length) if segment_length else []
    return MetricReport(
        label=label,
        ate_m=error,
        ate_per_meter=error / distance if distance > 0 else 0.0,
        sad=sad(est, ref),
        distance_m=distance,
        segment_errors=segments,
    )


def comparison_table(rows: dict[str, dict[str, float | Sequence[float]]], columns: Sequence[str]) -> str:
    """Fixed-width table of ATE/m per dataset; list cells render as ``mean ± std``.

    ``rows`` maps a dataset name to ``{column: value or list of values}``.
    """
    def cell(value) -> str:
        if value is None:
            return "-"
        if isinstance(value, (list, tuple, np.ndarray)):
            values = np.asarray(value, dtype=float)
            if len(values) == 0:
                return "-"
            return f"{values.mean():.3f} ± {values.std():.3f}"
        return f"{float(value):.3f}"

    header = ["Dataset", *columns]
    body = [[name, *(cell(values.get(c)) for c in columns)] for name, values in rows.items()]
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in body)
    return "\n".join(lines)
