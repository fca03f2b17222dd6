"""Head-direction ring: a 1D attractor integrating angular velocity."""
from __future__ import annotations

import math

from .attractor import AttractorNetwork, NetworkParams, decode_index
from .errors import OutOfRangeError

RING_SIZE = 360


class HeadDirectionNetwork:
    """Ring attractor whose bump angle is the heading estimate, in degrees.

    >>> from mcan_nav.defaults import HD_PARAMS
    >>> hd = HeadDirectionNetwork(HD_PARAMS, initial_heading=90.0)
    >>> round(hd.heading, 3)
    90.0
    """

    def __init__(self, params: NetworkParams, initial_heading: float = 0.0, n: int = RING_SIZE, calibrate: bool = True):
        if not 0.0 <= initial_heading < 360.0:
            initial_heading %= 360.0
        self.n = n
        self.params = params
        self.network = AttractorNetwork((n,), params, center=(initial_heading * n / 360.0,), calibrate=calibrate)

    @property
    def ring(self):
        return self.network.activity

    @property
    def faults(self) -> int:
        return self.network.faults

    @property
    def heading(self) -> float:
        value = decode_index(self.network.activity) * 360.0 / self.n
        return 0.0 if value >= 360.0 else value

    def step(self, omega: float, dt: float) -> float:
        """Integrate ``omega`` (rad/s) over ``dt`` seconds and return the new heading."""
        turn = omega * dt
        if not abs(turn) < math.pi:
            raise OutOfRangeError(f"turn of {turn:.3f} rad in one step exceeds half the ring; reduce dt")
        self.network.step(turn * self.n / (2.0 * math.pi))
        return self.heading
