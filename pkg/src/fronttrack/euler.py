"""3x3 Euler equations in the Lagrangian frame.

State w = (p, u, s) with conserved quantities q(w) = (-v, u, u^2/2 + h - pv)
and flux f(w) = (u, p, up).  The acoustic families have speeds -c and +c,
the entropy field is linearly degenerate with speed 0 (contacts).  Entropy
enters through K(s) = exp(s) in p = K(s) v^(-gamma).

Frame conversion: Eulerian wavespeeds are a^E = u + v*lambda^L for
characteristics and sigma^E = u_bar + v_bar*sigma^L for jumps, with
arithmetic averages across the jump.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import sqrtm

from .core import (
    Family,
    NotAdmissible,
    NoConvergence,
    NotOnCurve,
    State,
    VacuumError,
    WaveKind,
)
from .eos import GammaLawEOS
from .psystem import GRPWave, SHOCK, SIMPLE, PSystem


class EulerSystem:
    """All 3x3 wave mathematics over a gamma-law EOS with K(s) = exp(s)."""

    n = 3

    def __init__(self, eos=None):
        self.eos = eos if eos is not None else GammaLawEOS()

    def _eos_at(self, s):
        return self.eos.at_entropy(s)

    # -- state functions ---------------------------------------------------
    def specific_volume(self, w):
        return self._eos_at(w.s).specific_volume(w.p)

    def impedance(self, w):
        return self._eos_at(w.s).impedance(w.p)

    def enthalpy(self, w):
        return self._eos_at(w.s).enthalpy(w.p)

    def riemann_coordinate(self, w):
        return self._eos_at(w.s).riemann_coordinate(w.p)

    # -- conserved/flux maps (Lagrangian) ---------------------------------
    def q(self, w):
        v = self.specific_volume(w)
        h = self.enthalpy(w)
        return np.array([-v, w.u, 0.5 * w.u ** 2 + h - w.p * v])

    def f(self, w):
        return np.array([w.u, w.p, w.u * w.p])

    def Dq(self, w):
        g = self.eos.gamma
        v = self.specific_volume(w)
        v_p = -v / (g * w.p)
        v_s = v / g
        theta = w.p * v / (g * (g - 1.0))
        return np.array([
            [-v_p, 0.0, -v_s],
            [0.0, 1.0, 0.0],
            [v / g, w.u, theta],
        ])

    def Df(self, w):
        return np.array([
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0],
            [w.u, w.p, 0.0],
        ])

    # -- Eulerian counterparts --------------------------------------------
    def density(self, w):
        return 1.0 / self.specific_volume(w)

    def q_eulerian(self, w):
        rho = self.density(w)
        h = self.enthalpy(w)
        return np.array([
            rho,
            rho * w.u,
            rho * (0.5 * w.u ** 2 + h) - w.p,
        ])

    def f_eulerian(self, w):
        rho = self.density(w)
        h = self.enthalpy(w)
        return np.array([
            rho * w.u,
            rho * w.u ** 2 + w.p,
            rho * w.u * (0.5 * w.u ** 2 + h),
        ])

    # -- eigensystem -------------------------------------------------------
    def lam(self, w, family):
        """Characteristic speed: -c, 0, +c by family."""
        if family == Family.CONTACT:
            return 0.0
        return family.value * self.impedance(w)

    def families(self):
        return (Family.BACKWARD, Family.CONTACT, Family.FORWARD)

    def eigensystem(self, w):
        """Generalized eigenpairs of Df r = lambda Dq r, speed-ordered."""
        c = self.impedance(w)
        return [
            (-c, np.array([-1.0, 1.0 / c, 0.0])),
            (0.0, np.array([0.0, 0.0, 1.0])),
            (c, np.array([1.0, 1.0 / c, 0.0])),
        ]

    # -- wave curves -------------------------------------------------------
    def ahead_behind(self, w_l, w_r, direction):
        if direction == Family.FORWARD:
            return w_r, w_l
        return w_l, w_r

    def simple_wave_to(self, w_a, p_b, direction):
        """Behind state of an acoustic simple wave; entropy is constant."""
        iso = PSystem(self._eos_at(w_a.s))
        w = iso.simple_wave_to(State(w_a.p, w_a.u), p_b, direction)
        return State(w.p, w.u, w_a.s)

    def hugoniot_volume(self, w_a, p_b):
        """Specific volume behind a shock from [h] = v_bar [p].

        For the gamma law the entropy jump condition is linear in the behind
        volume, so no iteration is needed.
        """
        g = self.eos.gamma
        c1 = g / (g - 1.0)
        v_a = self.specific_volume(w_a)
        dp = p_b - w_a.p
        denom = c1 * p_b - 0.5 * dp
        if denom <= 0.0:
            raise VacuumError("Hugoniot volume undefined")
        return v_a * (c1 * w_a.p + 0.5 * dp) / denom

    def shock_curve_3(self, w_a, p_b, direction):
        """(behind state, sigma): shock with entropy solved from [h]=v_bar[p]."""
        if p_b <= 0.0:
            raise VacuumError(f"shock_curve_3 with p_b={p_b}")
        if p_b <= w_a.p:
            raise NotAdmissible(
                f"pressure must rise behind a shock (p_a={w_a.p}, p_b={p_b})")
        v_a = self.specific_volume(w_a)
        v_b = self.hugoniot_volume(w_a, p_b)
        dp, dv = p_b - w_a.p, v_a - v_b
        if dv <= 0.0:
            raise NotAdmissible("Hugoniot gives non-compressive volume jump")
        mag = math.sqrt(dp / dv)
        du = math.sqrt(dp * dv)
        s_b = GammaLawEOS.entropy_from_K(p_b * v_b ** self.eos.gamma)
        if direction == Family.FORWARD:
            return State(p_b, w_a.u + du, s_b), mag
        return State(p_b, w_a.u - du, s_b), -mag

    def contact_to(self, w_l, s_r):
        """Right state of a contact: p and u continuous, entropy jumps."""
        return State(w_l.p, w_l.u, s_r)

    def wave_strength(self, w_l, w_r, family, branch=None):
        """Signed strength: half-change of the opposite Riemann invariant for
        acoustic waves (at the ahead state's entropy), |[s]| for contacts."""
        if family == Family.CONTACT:
            return abs(w_r.s - w_l.s)
        w_a, w_b = self.ahead_behind(w_l, w_r, family)
        eos = self._eos_at(w_a.s)
        dz = eos.riemann_coordinate(w_a.p) - eos.riemann_coordinate(w_b.p)
        return 0.5 * (dz + (w_r.u - w_l.u))

    # -- generalized Riemann problem --------------------------------------
    def check_vacuum(self, w_L, w_R):
        z_l = self.riemann_coordinate(w_L)
        z_r = self.riemann_coordinate(w_R)
        if w_R.u - w_L.u >= z_l + z_r:
            raise VacuumError(
                f"vacuum: velocity gap {w_R.u - w_L.u:g} >= "
                f"z_l + z_r = {z_l + z_r:g}")

    def _phi(self, p, w_side, direction, force_simple):
        eos = self._eos_at(w_side.s)
        if force_simple or p <= w_side.p:
            offs = eos.riemann_coordinate(w_side.p) - eos.riemann_coordinate(p)
        else:
            v_side = eos.specific_volume(w_side.p)
            v_b = self.hugoniot_volume(w_side, p)
            offs = -math.sqrt(max((p - w_side.p) * (v_side - v_b), 0.0))
        return w_side.u + offs if direction == Family.BACKWARD else w_side.u - offs

    def solve_grp_3(self, w_L, w_R, widths=(0.0, 0.0, 0.0), tol=1e-13,
                    max_iter=200):
        """Middle states and the three waves of the 3x3 gRP.

        The contact width must be zero.  Returns (w_1, w_2, [backward,
        contact, forward]) where each wave entry is a GRPWave or None.
        """
        if widths[1] != 0.0:
            raise ValueError("contact width must be zero")
        self.check_vacuum(w_L, w_R)
        force_b, force_f = widths[0] > 0.0, widths[2] > 0.0

        def g(p):
            return (self._phi(p, w_L, Family.BACKWARD, force_b)
                    - self._phi(p, w_R, Family.FORWARD, force_f))

        # g is strictly decreasing; bracket and bisect
        if w_L.p == w_R.p and w_L.u == w_R.u:
            p_mid = w_L.p
        else:
            hi = max(w_L.p, w_R.p)
            it = 0
            while g(hi) > 0.0:
                hi *= 2.0
                it += 1
                if it > 300:
                    raise NoConvergence("no upper bracket for p_mid")
            lo = 0.0
            p_mid = 0.5 * hi
            for _ in range(max_iter):
                if g(p_mid) > 0.0:
                    lo = p_mid
                else:
                    hi = p_mid
                nxt = 0.5 * (lo + hi)
                if abs(nxt - p_mid) <= tol * max(nxt, 1e-300):
                    p_mid = nxt
                    break
                p_mid = nxt
        u_mid = self._phi(p_mid, w_L, Family.BACKWARD, force_b)

        back, w_1 = self._acoustic_wave(w_L, p_mid, u_mid, Family.BACKWARD,
                                        force_b, widths[0])
        fwd, w_2 = self._acoustic_wave(w_R, p_mid, u_mid, Family.FORWARD,
                                       force_f, widths[2])
        contact = None
        if abs(w_2.s - w_1.s) > 1e-14:
            contact = GRPWave(Family.CONTACT, SIMPLE, w_1, w_2,
                              abs(w_2.s - w_1.s), 0.0, 0.0)
        return w_1, w_2, [back, contact, fwd]

    def _acoustic_wave(self, w_side, p_mid, u_mid, family, force_simple,
                       width):
        use_shock = (not force_simple) and p_mid > w_side.p
        if use_shock:
            behind, sigma = self.shock_curve_3(w_side, p_mid, family)
            branch = SHOCK
        else:
            behind = self.simple_wave_to(w_side, p_mid, family)
            sigma, branch = None, SIMPLE
        behind = State(p_mid, u_mid, behind.s)
        if family == Family.BACKWARD:
            w_l, w_r = w_side, behind
        else:
            w_l, w_r = behind, w_side
        if abs(p_mid - w_side.p) < 1e-15 * w_side.p and abs(
                behind.u - w_side.u) < 1e-15:
            return None, behind
        zeta = self.wave_strength(w_l, w_r, family)
        wave = GRPWave(family, branch, w_l, w_r, zeta, sigma,
                       width if branch == SIMPLE else 0.0)
        return wave, behind

    # -- frame conversion --------------------------------------------------
    def to_eulerian_speed(self, w_l, w_r, a_L):
        """a^E = u_bar + v_bar a^L with arithmetic averages across the jump."""
        u_bar = 0.5 * (w_l.u + w_r.u)
        v_bar = 0.5 * (self.specific_volume(w_l) + self.specific_volume(w_r))
        return u_bar + v_bar * a_L

    def eulerian_sound_speed(self, w):
        return self.impedance(w) * self.specific_volume(w)

    # -- preconditioners ---------------------------------------------------
    def preconditioner_sqrt_dq(self, w_bar):
        """A = sqrt(Dq(u_bar))^(-T), the symmetric-square-root choice."""
        root = np.real(sqrtm(self.Dq(w_bar)))
        return np.linalg.inv(root).T

    def preconditioner_ar(self, w_l, w_r):
        """Acoustic-rescaling preconditioner built from the wave averages."""
        eos = self._eos_at(w_l.s)
        inv_c, inv_c2, _ = eos.averages(w_l.p, w_r.p)
        p_bar = 0.5 * (w_l.p + w_r.p)
        u_bar = 0.5 * (w_l.u + w_r.u)
        scale = np.diag([inv_c / inv_c2, 1.0, 1.0])
        shear = np.array([
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [-p_bar, -u_bar, 1.0],
        ])
        return scale @ shear
