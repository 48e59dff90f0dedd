"""Flexible-antenna downlink simulator and effective-rank placement optimizer.

Two antenna architectures are modeled: a movable-antenna (MA) grid on a 2D
array plane at the base station, and pinching antennas (PA) activated along
dielectric waveguides. Antenna placements are scored by the effective rank
of the multi-user channel matrix and optimized by graph-RL agents, with
random/greedy/exhaustive references for verification.
"""

from flexrank.erank import effective_rank, singular_values
from flexrank.scenario import AreaConfig, SeedStream, bs_position

__all__ = [
    "AreaConfig",
    "SeedStream",
    "bs_position",
    "effective_rank",
    "singular_values",
]
