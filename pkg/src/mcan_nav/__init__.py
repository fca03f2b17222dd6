"""Dead reckoning with multiscale continuous attractor networks.

Linear and angular velocity are integrated by a 1D head-direction ring and a
stack of 2D toroidal attractor sheets with geometrically spaced resolutions.
A genetic algorithm tunes the network parameters and a city simulator
generates benchmark trajectories.
"""
from .attractor import AttractorNetwork, NetworkParams, ShiftCommand, decode_index, init_gaussian, step
from .heading import HeadDirectionNetwork
from .multiscale import MultiscaleNetwork, PoseEstimate, select_scale, track_trajectory, update_wraparound

__all__ = [
    "AttractorNetwork",
    "HeadDirectionNetwork",
    "MultiscaleNetwork",
    "NetworkParams",
    "PoseEstimate",
    "ShiftCommand",
    "decode_index",
    "init_gaussian",
    "select_scale",
    "step",
    "track_trajectory",
    "update_wraparound",
]
