"""Central numeric tolerance configuration.

Every threshold used by the library lives in one frozen record so that tests
and the CLI can tighten or relax them in a single place instead of scattering
magic numbers through the modules.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds shared across the library.

    unitarity         max entrywise deviation of U H U from the identity
    norm              max deviation of a state vector norm from 1
    probability_floor below this a measurement branch is treated as dead
    rank              singular values at or below this count as zero
    real_class        max imaginary part for a target to count as real
    zeta_one          max |zeta - 1| for the balanced complex target class
    success           min fidelity for a branch to count as an exact success
    reconciliation    max gap between enumerated and closed-form totals
    input_norm        max norm deviation accepted (then renormalized) on file
                      and target input before rejection
    """

    unitarity: float = 1e-9
    norm: float = 1e-12
    probability_floor: float = 1e-14
    rank: float = 1e-10
    real_class: float = 1e-10
    zeta_one: float = 1e-9
    success: float = 1e-9
    reconciliation: float = 1e-9
    input_norm: float = 1e-6


DEFAULT_TOLERANCES = Tolerances()
