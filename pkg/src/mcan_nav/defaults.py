"""Tuned genomes shipped with the package.

Produced by ``mcan-nav tune --topology 1d --seed 0`` and
``mcan-nav tune --topology 2d --seed 0`` with the default GA configuration
(24 genomes, 20 generations, 1000-step trials).
"""
from .tuning import Genome

HD_GENOME = Genome(A=7.23535617042717, E=1.26124343571436, gamma=0.4334598874525332, phi=6.678995850917438e-05)
POSITION_GENOME = Genome(A=9.5937551343354, E=8.579816153959264, gamma=0.41193398340799203, phi=1.1569229463482807e-05)

HD_PARAMS = HD_GENOME.to_params()
POSITION_PARAMS = POSITION_GENOME.to_params()
