"""Continuous attractor dynamics on rings and tori.

Every function here works on plain ``numpy`` arrays of any dimensionality, so
the same code drives the 1D head-direction ring and the 2D position sheets.
One update is::

    C   = activity of positive neurons, rolled by the integer offset
    Cf  = gamma * separable linear interpolation of C by the fractional offset
    eps = truncated-Gaussian excitation from the shifted packet Cf
    mu  = phi * sum(X + Cf + eps)
    X'  = normalise(max(X + Cf + eps - mu, 0))
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.ndimage import convolve1d

from .errors import ConfigurationError, NetworkCollapse, OutOfRangeError, UndecodableError

log = logging.getLogger(__name__)

RADIUS_RANGE = (1, 10)
GAMMA_RANGE = (0.0, 1.0)
PHI_RANGE = (1e-5, 5e-3)
REST_TOLERANCE = 1e-13


@dataclass(frozen=True)
class NetworkParams:
    """The four tuned dynamics parameters plus optional Gaussian widths.

    ``sigma_x``/``sigma_y`` default to half of the relevant radius: ``A/2``
    when building the initial bump and ``E/2`` for excitation.
    """

    activation_radius: int
    excitation_radius: int
    motion_confidence: float
    inhibition_factor: float
    sigma_x: float | None = None
    sigma_y: float | None = None

    def __post_init__(self):
        for name in ("activation_radius", "excitation_radius"):
            value = getattr(self, name)
            if int(value) != value or not RADIUS_RANGE[0] <= value <= RADIUS_RANGE[1]:
                raise ConfigurationError(f"{name} must be an integer in {RADIUS_RANGE}, got {value}")
            object.__setattr__(self, name, int(value))
        if not GAMMA_RANGE[0] <= self.motion_confidence <= GAMMA_RANGE[1]:
            raise ConfigurationError(f"motion_confidence must lie in {GAMMA_RANGE}, got {self.motion_confidence}")
        # small tolerance so genomes clamped at the bound survive float round trips
        lo, hi = PHI_RANGE
        if not lo * (1 - 1e-9) <= self.inhibition_factor <= hi * (1 + 1e-9):
            raise ConfigurationError(f"inhibition_factor must lie in {PHI_RANGE}, got {self.inhibition_factor}")
        for name in ("sigma_x", "sigma_y"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigurationError(f"{name} must be positive, got {value}")

    def sigmas(self, radius: int, ndim: int) -> tuple[float, ...]:
        default = radius / 2.0
        given = (self.sigma_x, self.sigma_y)
        return tuple(given[min(axis, 1)] or default for axis in range(ndim))


@dataclass(frozen=True)
class ShiftCommand:
    """Per-axis offset in neurons split into ``floor`` and a fraction in [0, 1)."""

    integer: tuple[int, ...]
    fraction: tuple[float, ...]

    @classmethod
    def from_offset(cls, *offset: float) -> "ShiftCommand":
        integer, fraction = [], []
        for value in offset:
            if not math.isfinite(value):
                raise OutOfRangeError(f"non-finite shift {value}")
            whole = math.floor(value)
            frac = value - whole
            if frac >= 1.0:  # -1e-20 style inputs round the fraction up to 1
                whole, frac = whole + 1, 0.0
            integer.append(int(whole))
            fraction.append(frac)
        return cls(tuple(integer), tuple(fraction))

    @property
    def offset(self) -> tuple[float, ...]:
        return tuple(i + f for i, f in zip(self.integer, self.fraction))


def _check_shape(shape: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(int(n) for n in shape)
    if not shape or any(n <= 0 for n in shape):
        raise ConfigurationError(f"grid dimensions must be positive, got {shape}")
    return shape


def gaussian_window(radius: int, sigma: float, center_offset: float = 0.0) -> np.ndarray:
    d = np.arange(-radius, radius + 1) - center_offset
    return np.exp(-(d**2) / (2.0 * sigma**2))


def init_gaussian(shape: Sequence[int], center: Sequence[float], params: NetworkParams) -> np.ndarray:
    """Gaussian bump truncated to a ``(2A+1)``-wide toroidal window, unit L2 norm.

    ``center`` may be fractional; the window holds every neuron within ``A``
    of the exact centre, so a half-integer centre gets a symmetric ``2A``-wide
    window.
    """
    shape = _check_shape(shape)
    center = tuple(center)
    if len(center) != len(shape):
        raise ConfigurationError(f"center {center} does not match grid dimensions {shape}")
    radius = params.activation_radius
    if any(2 * radius + 1 > n for n in shape):
        raise ConfigurationError(f"activation window {2 * radius + 1} exceeds grid {shape}")

    profiles, indices = [], []
    for n, c, sigma in zip(shape, center, params.sigmas(radius, len(shape))):
        offsets = np.arange(math.ceil(c - radius - 1e-12), math.floor(c + radius + 1e-12) + 1)
        profiles.append(np.exp(-((offsets - c) ** 2) / (2.0 * sigma**2)))
        indices.append(offsets % n)

    bump = profiles[0]
    for profile in profiles[1:]:
        bump = np.multiply.outer(bump, profile)
    activity = np.zeros(shape)
    activity[np.ix_(*indices)] = bump
    return activity / np.linalg.norm(activity)


def shift_copy(activity: np.ndarray, cmd: ShiftCommand) -> np.ndarray:
    """Copy positive neurons to their integer-shifted (wrapped) positions."""
    positive = np.where(activity > 0, activity, 0.0)
    return np.roll(positive, cmd.integer[: activity.ndim], axis=tuple(range(activity.ndim)))


def fractional_shift(field: np.ndarray, cmd: ShiftCommand, gamma: float) -> np.ndarray:
    """Scale by ``gamma`` and interpolate toward the +1 neighbour on each axis."""
    out = field
    for axis, frac in enumerate(cmd.fraction[: field.ndim]):
        if frac:
            out = (1.0 - frac) * out + frac * np.roll(out, 1, axis=axis)
    return gamma * out


def excitation(activity: np.ndarray, params: NetworkParams) -> np.ndarray:
    radius = params.excitation_radius
    if any(2 * radius + 1 > n for n in activity.shape):
        raise ConfigurationError(f"excitation window {2 * radius + 1} exceeds grid {activity.shape}")
    out = np.where(activity > 0, activity, 0.0)
    for axis, sigma in enumerate(params.sigmas(radius, activity.ndim)):
        out = convolve1d(out, gaussian_window(radius, sigma), axis=axis, mode="wrap")
    return out


def inhibition(values: np.ndarray, phi: float) -> float:
    return float(np.sum(values)) * phi


def step(activity: np.ndarray, cmd: ShiftCommand, params: NetworkParams) -> np.ndarray:
    """One attractor update; returns a new unit-norm, nonnegative array.

    Raises:
        NetworkCollapse: every neuron fell below the global inhibition.
    """
    shifted = fractional_shift(shift_copy(activity, cmd), cmd, params.motion_confidence)
    total = activity + shifted + excitation(shifted, params)
    total -= inhibition(total, params.inhibition_factor)
    np.maximum(total, 0.0, out=total)
    norm = np.linalg.norm(total)
    if not norm > 0 or not math.isfinite(norm):
        raise NetworkCollapse("activity vanished after inhibition")
    return total / norm


@functools.lru_cache(maxsize=16)
def _unit_circle(n: int) -> tuple[np.ndarray, np.ndarray]:
    angles = 2.0 * np.pi * np.arange(n) / n
    return np.sin(angles), np.cos(angles)


def circular_mean_index(weights: np.ndarray) -> float:
    """Circular mean of neuron indices on a ring of ``len(weights)`` neurons, in [0, n)."""
    n = len(weights)
    if not np.any(weights > 0):
        raise UndecodableError("no positive activity to decode")
    sin, cos = _unit_circle(n)
    value = math.atan2(float(weights @ sin), float(weights @ cos)) * n / (2.0 * np.pi)
    value %= n
    return 0.0 if value >= n else value


def decode_index(activity: np.ndarray, axis: int = 0) -> float:
    """Circular-mean position along ``axis`` using the marginal activity."""
    others = tuple(a for a in range(activity.ndim) if a != axis)
    marginal = activity.sum(axis=others) if others else activity
    return circular_mean_index(marginal)


def settle(activity: np.ndarray, params: NetworkParams, max_steps: int = 200, tol: float = 1e-10) -> np.ndarray:
    """Run zero-motion updates until the bump shape stops changing."""
    zero = ShiftCommand.from_offset(*([0.0] * activity.ndim))
    for _ in range(max_steps):
        new = step(activity, zero, params)
        change = float(np.abs(new - activity).max())
        activity = new
        if change < tol:
            break
    return activity


@functools.lru_cache(maxsize=64)
def motion_gain(shape: tuple[int, ...], params: NetworkParams, reference_shift: float = 1.0, steps: int = 20) -> float:
    """Decoded displacement per commanded neuron for a settled bump.

    The unshifted term in the update anchors the packet, so a bump moves
    slightly less than commanded. Networks divide their commands by this
    gain. Returns 1.0 when the dynamics cannot sustain a moving bump.
    """
    center = tuple(n // 2 for n in shape)
    try:
        activity = settle(init_gaussian(shape, center, params), params)
        cmd = ShiftCommand.from_offset(reference_shift, *([0.0] * (len(shape) - 1)))
        n = shape[0]
        previous, travelled = decode_index(activity, 0), 0.0
        for _ in range(steps):
            activity = step(activity, cmd, params)
            current = decode_index(activity, 0)
            travelled += (current - previous + n / 2) % n - n / 2
            previous = current
    except (NetworkCollapse, UndecodableError):
        return 1.0
    gain = travelled / (steps * reference_shift)
    if not math.isfinite(gain) or gain < 0.1 or gain > 2.0:
        return 1.0
    return gain


class AttractorNetwork:
    """Stateful ring or torus with velocity-gain compensation and fault recovery.

    A network has a single writer; ``step`` mutates ``activity`` in place of
    the previous state. Distinct instances share nothing.
    """

    def __init__(
        self,
        shape: Sequence[int],
        params: NetworkParams,
        center: Sequence[float] | None = None,
        calibrate: bool = True,
    ):
        self.shape = _check_shape(shape)
        self.params = params
        if center is None:
            center = tuple(n // 2 for n in self.shape)
        self.activity = settle(init_gaussian(self.shape, center, params), params)
        self.at_rest = False
        self.gain = motion_gain(self.shape, params) if calibrate else 1.0
        self.faults = 0
        self._last = self.decode()

    @property
    def neuron_count(self) -> int:
        return int(np.prod(self.shape))

    def step(self, *offset: float) -> None:
        """Move the bump by ``offset`` neurons (one value per axis)."""
        if len(offset) != len(self.shape):
            raise ConfigurationError(f"expected {len(self.shape)} offsets, got {len(offset)}")
        for value, n in zip(offset, self.shape):
            if not abs(value) < n / 2:
                raise OutOfRangeError(f"shift of {value} neurons exceeds half of a {n}-neuron axis")
        moving = any(offset)
        if not moving and self.at_rest:
            return
        cmd = ShiftCommand.from_offset(*(value / self.gain for value in offset))
        try:
            new = step(self.activity, cmd, self.params)
        except NetworkCollapse:
            self.faults += 1
            log.warning("attractor collapsed; reinitialising at %s", self._last)
            new = init_gaussian(self.shape, self._last, self.params)
            moving = True
        # a stationary bump at its fixed point is skipped until commanded again
        self.at_rest = not moving and float(np.abs(new - self.activity).max()) < REST_TOLERANCE
        self.activity = new
        self._last = self.decode()

    def decode(self) -> tuple[float, ...]:
        return tuple(decode_index(self.activity, axis) for axis in range(len(self.shape)))
