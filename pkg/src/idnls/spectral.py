"""Eigenvalue quartets and the velocity / frequency attached to them."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass


def canonical_eigenvalue(z: complex) -> complex:
    """Representative of ``{z, -z}`` with Re > 0, or Re == 0 and Im > 0."""
    z = complex(z)
    if z.real < 0 or (z.real == 0 and z.imag < 0):
        return -z
    return z


def tw_velocity(z: complex) -> float:
    """Soliton velocity -sinh(2a) sin(2b) / a for z = exp(a + ib), |z| > 1."""
    w = cmath.log(complex(z))
    alpha, beta = w.real, w.imag
    if not alpha > 0:
        raise ValueError(f"|z| must exceed 1, got |z|={abs(z)}")
    return -math.sinh(2 * alpha) * math.sin(2 * beta) / alpha


def omega(z: complex) -> complex:
    """(z - 1/z)^2 / 2; norming constants evolve as C(t) = C(0) exp(2 i omega t)."""
    z = complex(z)
    return (z - 1 / z) ** 2 / 2


@dataclass(frozen=True)
class EigenQuartet:
    """Quartet ``{+-z, +-1/conj(z)}`` stored through its canonical member.

    ``C`` is the norming constant of ``z`` (and of ``-z``); the one of
    ``1/conj(z)`` is derived on demand as :attr:`C_star`.
    """

    z: complex
    C: complex = 1.0

    def __post_init__(self):
        z = complex(self.z)
        if not abs(z) > 1:
            raise ValueError(f"eigenvalue must satisfy |z| > 1, got {z}")
        object.__setattr__(self, "z", canonical_eigenvalue(z))
        object.__setattr__(self, "C", complex(self.C))

    @classmethod
    def from_polar(cls, alpha: float, beta: float, C: complex = 1.0) -> "EigenQuartet":
        return cls(cmath.exp(complex(alpha, beta)), C)

    @property
    def alpha(self) -> float:
        return math.log(abs(self.z))

    @property
    def beta(self) -> float:
        return cmath.phase(self.z)

    @property
    def omega(self) -> complex:
        return omega(self.z)

    @property
    def tw(self) -> float:
        return tw_velocity(self.z)

    @property
    def C_star(self) -> complex:
        return self.z.conjugate() ** -2 * self.C.conjugate()

    @property
    def members(self) -> tuple:
        zs = 1 / self.z.conjugate()
        return (self.z, -self.z, zs, -zs)

    def evolved(self, dt: float) -> "EigenQuartet":
        return EigenQuartet(self.z, self.C * cmath.exp(2j * self.omega * dt))

    def with_C(self, C: complex) -> "EigenQuartet":
        return EigenQuartet(self.z, C)
