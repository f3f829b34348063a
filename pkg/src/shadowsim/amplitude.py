"""Complex amplitude arithmetic.

Amplitudes are plain Python ``complex`` values. The four composition rules
are kept as separate named operations so call sites say which rule they
are applying: squared modulus for probabilities, addition over
indistinguishable alternatives, multiplication along a route, and
multiplication across independent particles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Raised when an operation is called outside its domain."""


def _check_finite(phi: complex) -> complex:
    phi = complex(phi)
    if not (math.isfinite(phi.real) and math.isfinite(phi.imag)):
        raise DomainError(f"amplitude is not finite: {phi!r}")
    return phi


def probability_of(phi: complex) -> float:
    """Return ``|phi|**2``."""
    phi = _check_finite(phi)
    return phi.real * phi.real + phi.imag * phi.imag


def sum_alternatives(phis: Iterable[complex]) -> complex:
    """Total amplitude for indistinguishable alternatives (their sum)."""
    phis = [_check_finite(p) for p in phis]
    if not phis:
        raise DomainError("sum_alternatives needs at least one amplitude")
    # math.fsum keeps the result independent of summation order
    return complex(math.fsum(p.real for p in phis), math.fsum(p.imag for p in phis))


def chain_route(phis: Iterable[complex]) -> complex:
    """Amplitude of a route taken in stages: the ordered product."""
    phis = [_check_finite(p) for p in phis]
    if not phis:
        raise DomainError("chain_route needs at least one amplitude")
    out = phis[0]
    for p in phis[1:]:
        out = out * p
    return out


def product_independent(phi_left: complex, phi_right: complex) -> complex:
    """Joint amplitude of two independent particles (streams)."""
    return _check_finite(phi_left) * _check_finite(phi_right)


@dataclass(frozen=True)
class Clock:
    """Polar view of an amplitude: a rotating arrow of given length.

    ``phase`` is kept in ``[0, 2*pi)``. Amplitudes stay the stored form
    everywhere else; a clock is only built on demand for display or for
    phase bookkeeping.
    """

    phase: float
    magnitude: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.phase) and math.isfinite(self.magnitude)):
            raise DomainError("clock fields must be finite")
        if self.magnitude < 0:
            raise DomainError("clock magnitude must be non-negative")
        phase = math.fmod(self.phase, TWO_PI) % TWO_PI
        if phase >= TWO_PI:  # tiny negative inputs round up to 2*pi
            phase = 0.0
        object.__setattr__(self, "phase", phase)

    @classmethod
    def from_amplitude(cls, phi: complex) -> "Clock":
        phi = _check_finite(phi)
        return cls(phase=cmath.phase(phi), magnitude=abs(phi))

    def to_amplitude(self) -> complex:
        return cmath.rect(self.magnitude, self.phase)

    def advance(self, dphase: float) -> "Clock":
        """Rotate the hand; equivalent to multiplying by ``exp(i*dphase)``."""
        return Clock(self.phase + dphase, self.magnitude)
