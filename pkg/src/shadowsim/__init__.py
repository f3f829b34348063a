"""Shadow-stream simulator for one- and two-particle interferometry.

Path amplitudes are composed with Feynman's rules, tangible/shadow
particle bookkeeping is tracked per source event, and the continuum case
is handled by a time-sliced path-sum propagator.
"""

from .amplitude import (
    Clock,
    DomainError,
    chain_route,
    probability_of,
    product_independent,
    sum_alternatives,
)
from .interferometer import (
    Layout,
    build_mach_zehnder,
    build_rarity_tapster,
    congruent,
    equivalent,
    path_amplitude,
)
from .experiment import (
    ChshResult,
    JointDistribution,
    chsh,
    correlation,
    estimate_chsh_from_records,
    joint_distribution,
    sample_coincidences,
)

__all__ = [
    "ChshResult",
    "Clock",
    "DomainError",
    "JointDistribution",
    "Layout",
    "build_mach_zehnder",
    "build_rarity_tapster",
    "chain_route",
    "chsh",
    "congruent",
    "correlation",
    "equivalent",
    "estimate_chsh_from_records",
    "joint_distribution",
    "path_amplitude",
    "probability_of",
    "product_independent",
    "sample_coincidences",
    "sum_alternatives",
]

__version__ = "0.1.0"
