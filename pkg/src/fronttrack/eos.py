"""Gamma-law equation of state and wave-curve integral averages.

All thermodynamic scalars used by the wave curves: specific volume v(p),
acoustic impedance c(p) = sqrt(-dp/dv), the Riemann coordinate
z(p) = int_0^p dp'/c, and the two-point averages <1/c>, <1/c^2> across a
pressure interval together with their Jensen ratio beta = <1/c>^2/<1/c^2>.

For the 3x3 Euler equations the entropy enters through K(s) = exp(s) in
p = K(s) v^(-gamma); the isentropic p-system uses a fixed K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import VacuumError


@dataclass(frozen=True)
class GammaLawEOS:
    """p = K v^(-gamma) with gamma > 1; K may depend on entropy via K(s)."""

    gamma: float = 1.4
    K: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError("gamma must exceed 1")
        if not self.K > 0.0:
            raise ValueError("K must be positive")

    # -- entropy handling --------------------------------------------------
    @staticmethod
    def entropy_constant(s):
        """Monotone entropy map K(s) = exp(s)."""
        return math.exp(s)

    def at_entropy(self, s):
        """EOS with K = exp(s); None keeps the isentropic constant."""
        if s is None:
            return self
        return GammaLawEOS(self.gamma, self.entropy_constant(s))

    @staticmethod
    def entropy_from_K(K):
        """Inverse of the entropy map: s = log K."""
        return math.log(K)

    # -- scalar functions --------------------------------------------------
    def specific_volume(self, p):
        """v(p) = (K/p)^(1/gamma), strictly decreasing."""
        if p <= 0.0:
            raise VacuumError(f"specific_volume at p={p}")
        return (self.K / p) ** (1.0 / self.gamma)

    def pressure_from_volume(self, v):
        if v <= 0.0:
            raise VacuumError(f"pressure_from_volume at v={v}")
        return self.K * v ** (-self.gamma)

    def impedance(self, p):
        """Lagrangian sound speed c(p) = sqrt(-dp/dv), strictly increasing."""
        if p <= 0.0:
            raise VacuumError(f"impedance at p={p}")
        g = self.gamma
        return math.sqrt(g) * self.K ** (-0.5 / g) * p ** (0.5 * (g + 1.0) / g)

    def impedance_inverse(self, c):
        """Pressure with impedance c (inverse of ``impedance``)."""
        g = self.gamma
        base = c / (math.sqrt(g) * self.K ** (-0.5 / g))
        return base ** (2.0 * g / (g + 1.0))

    def riemann_coordinate(self, p):
        """z(p) = int_0^p dp'/c(p'); z(0) = 0, strictly increasing."""
        if p < 0.0:
            raise VacuumError(f"riemann_coordinate at p={p}")
        if p == 0.0:
            return 0.0
        g = self.gamma
        return (2.0 * math.sqrt(g) / (g - 1.0)) * self.K ** (0.5 / g) \
            * p ** (0.5 * (g - 1.0) / g)

    def pressure_from_z(self, z):
        """Inverse of the Riemann coordinate; z <= 0 maps to vacuum."""
        if z <= 0.0:
            raise VacuumError(f"pressure_from_z at z={z}")
        g = self.gamma
        base = z * (g - 1.0) / (2.0 * math.sqrt(g) * self.K ** (0.5 / g))
        return base ** (2.0 * g / (g - 1.0))

    def eulerian_sound_speed(self, p):
        """a = c v: the Eulerian-frame sound speed."""
        return self.impedance(p) * self.specific_volume(p)

    def enthalpy(self, p):
        """Specific enthalpy h = gamma/(gamma-1) p v for the gamma law."""
        return self.gamma / (self.gamma - 1.0) * p * self.specific_volume(p)

    # -- two-point averages ------------------------------------------------
    def averages(self, p_l, p_r):
        """(<1/c>, <1/c^2>, beta) across the pressure interval.

        <1/c> = (z(p_r)-z(p_l))/(p_r-p_l) and <1/c^2> = (v(p_l)-v(p_r))/
        (p_r-p_l), both from closed-form antiderivatives; the coincident
        limit gives 1/c and 1/c^2 at the common pressure.  The Jensen ratio
        beta = <1/c>^2/<1/c^2> satisfies beta < 1 for distinct pressures and
        beta = 1 at coincidence.
        """
        if p_l <= 0.0 or p_r <= 0.0:
            raise VacuumError(f"averages at p_l={p_l}, p_r={p_r}")
        dp = p_r - p_l
        # exact relative coincidence guard: the difference quotients lose all
        # significance once |dp| ~ eps*p, so switch to the pointwise limit
        if abs(dp) <= 1e-9 * min(p_l, p_r):
            p = 0.5 * (p_l + p_r)
            c = self.impedance(p)
            return 1.0 / c, 1.0 / c ** 2, 1.0
        inv_c = (self.riemann_coordinate(p_r) - self.riemann_coordinate(p_l)) / dp
        inv_c2 = (self.specific_volume(p_l) - self.specific_volume(p_r)) / dp
        beta = inv_c ** 2 / inv_c2
        return inv_c, inv_c2, beta
