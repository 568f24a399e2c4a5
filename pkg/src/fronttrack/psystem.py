"""Wave curves, Riemann solver and interaction rules for the p-system.

The isentropic gas-dynamics system in Lagrangian coordinates, with state
w = (p, u), conserved quantities q(w) = (-v, u) and flux f(w) = (u, p).
Characteristic speeds are -c(p) (backward family) and +c(p) (forward
family).  The ahead state of a forward wave is its right state; of a
backward wave, its left state.  The signed strength is the half-change of
the opposite Riemann invariant,

    zeta = (z(p_a) - z(p_b) + u_r - u_l) / 2,

positive for expansive waves (pressure drops from ahead to behind).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Family,
    NoConvergence,
    NotAdmissible,
    NotOnCurve,
    State,
    VacuumError,
    WaveKind,
)
from .eos import GammaLawEOS

SIMPLE = "simple"
SHOCK = "shock"


@dataclass
class GRPWave:
    """One wave of a (generalized) Riemann solution, before discretization."""

    family: Family
    branch: str                # SIMPLE or SHOCK
    left: State
    right: State
    strength: float
    sigma: float | None = None  # exact speed, shocks only
    width: float = 0.0          # virtual width carried into the dgRS

    @property
    def kind(self):
        if self.branch == SHOCK:
            return WaveKind.SHOCK
        if self.family == Family.CONTACT:
            return WaveKind.CONTACT
        return WaveKind.RAREFACTION if self.strength > 0 else WaveKind.COMPRESSION


class PSystem:
    """All N=2 wave mathematics over a fixed gamma-law EOS."""

    n = 2

    def __init__(self, eos=None):
        self.eos = eos if eos is not None else GammaLawEOS()

    # -- conserved/flux maps ----------------------------------------------
    def q(self, w):
        return np.array([-self.eos.specific_volume(w.p), w.u])

    def f(self, w):
        return np.array([w.u, w.p])

    def lam(self, w, family):
        """Characteristic speed of ``family`` at state ``w``."""
        return family.value * self.eos.impedance(w.p)

    def families(self):
        return (Family.BACKWARD, Family.FORWARD)

    def ahead_behind(self, w_l, w_r, direction):
        """(ahead, behind) states: ahead is right for forward waves."""
        if direction == Family.FORWARD:
            return w_r, w_l
        return w_l, w_r

    def preconditioner(self, p_l, p_r):
        """Diagonal weights (<1/c>/<1/c^2>, 1) across the pressure interval."""
        inv_c, inv_c2, _ = self.eos.averages(p_l, p_r)
        return np.array([inv_c / inv_c2, 1.0])

    # -- curve maps --------------------------------------------------------
    def simple_wave_to(self, w_a, p_b, direction):
        """Behind state of a simple wave with ahead state ``w_a``.

        Velocity offset follows the eigenvector fields: a forward curve has
        u_r - u_l = z(p_r) - z(p_l), a backward curve the negative.
        """
        if p_b <= 0.0:
            raise VacuumError(f"simple_wave_to with p_b={p_b}")
        dz = self.eos.riemann_coordinate(w_a.p) - self.eos.riemann_coordinate(p_b)
        if direction == Family.FORWARD:
            # behind = left: u_b = u_a - (z_a - z_b) ... with u_r - u_l = z_r - z_l
            u_b = w_a.u - dz
        else:
            u_b = w_a.u + dz
        return State(p_b, u_b, w_a.s)

    def shock_to(self, w_a, p_b, direction):
        """(behind state, signed Lagrangian shock speed sigma).

        Admissible shocks have higher pressure behind; |sigma| =
        sqrt([p]/[-v]) and the velocity jump is sqrt([p][-v]) with the sign
        fixed by the family.
        """
        if p_b <= 0.0:
            raise VacuumError(f"shock_to with p_b={p_b}")
        if p_b <= w_a.p:
            raise NotAdmissible(
                f"pressure must rise behind a shock (p_a={w_a.p}, p_b={p_b})")
        v_a = self.eos.specific_volume(w_a.p)
        v_b = self.eos.specific_volume(p_b)
        dp, dv = p_b - w_a.p, v_a - v_b
        mag = math.sqrt(dp / dv)
        du = math.sqrt(dp * dv)
        if direction == Family.FORWARD:
            sigma = mag
            u_b = w_a.u + du
        else:
            sigma = -mag
            u_b = w_a.u - du
        return State(p_b, u_b, w_a.s), sigma

    def wave_strength(self, w_l, w_r, direction, branch, validate=True,
                      tol=1e-10):
        """Signed strength of the wave (w_l, w_r) on the indicated curve."""
        if validate:
            self._validate_on_curve(w_l, w_r, direction, branch, tol)
        w_a, _w_b = self.ahead_behind(w_l, w_r, direction)
        p_b = _w_b.p
        dz = self.eos.riemann_coordinate(w_a.p) - self.eos.riemann_coordinate(p_b)
        return 0.5 * (dz + (w_r.u - w_l.u))

    def _validate_on_curve(self, w_l, w_r, direction, branch, tol):
        w_a, w_b = self.ahead_behind(w_l, w_r, direction)
        scale = max(1.0, abs(w_a.u), abs(w_b.u))
        if branch == SIMPLE:
            expect = self.simple_wave_to(w_a, w_b.p, direction)
        else:
            if w_b.p <= w_a.p:
                raise NotOnCurve("shock branch needs higher pressure behind")
            expect, _ = self.shock_to(w_a, w_b.p, direction)
        if abs(expect.u - w_b.u) > tol * scale:
            raise NotOnCurve(
                f"state pair off the {direction.name.lower()} {branch} curve "
                f"by {abs(expect.u - w_b.u):g}")

    # -- (z,u)-plane curve maps, parameterized by strength ----------------
    def w_map(self, w_a, zeta, direction):
        """Simple-wave map W_±: behind state at signed strength ``zeta``."""
        z_a = self.eos.riemann_coordinate(w_a.p)
        p_b = self.eos.pressure_from_z(z_a - zeta)
        return self.simple_wave_to(w_a, p_b, direction)

    def w_map_T(self, w_b, zeta, direction):
        """Inverse simple-wave map W_±^T: ahead state from behind state."""
        z_b = self.eos.riemann_coordinate(w_b.p)
        p_a = self.eos.pressure_from_z(z_b + zeta)
        du = zeta if direction == Family.FORWARD else -zeta
        return State(p_a, w_b.u + du, w_b.s)

    def _shock_strength_of_pb(self, w_a, p_b):
        """zeta(p_b) = (z_a - z_b - sqrt([p][-v]))/2, decreasing in p_b."""
        dz = self.eos.riemann_coordinate(w_a.p) - self.eos.riemann_coordinate(p_b)
        dp = p_b - w_a.p
        dv = self.eos.specific_volume(w_a.p) - self.eos.specific_volume(p_b)
        return 0.5 * (dz - math.sqrt(max(dp * dv, 0.0)))

    def s_map(self, w_a, zeta, direction):
        """Shock map S_±: behind state at strength ``zeta`` < 0."""
        if zeta >= 0.0:
            raise NotAdmissible("shock strength must be negative")
        p_b = self._solve_monotone(
            lambda p: self._shock_strength_of_pb(w_a, p) - zeta,
            lo=w_a.p, grow=True)
        state, _ = self.shock_to(w_a, p_b, direction)
        return state

    def s_map_T(self, w_b, zeta, direction):
        """Inverse shock map S_±^T: ahead state at strength ``zeta`` < 0."""
        if zeta >= 0.0:
            raise NotAdmissible("shock strength must be negative")

        def g(p_a):
            # negated so the solver sees a decreasing function of p_a
            return zeta - self._shock_strength_of_pb(State(p_a, 0.0, w_b.s), w_b.p)

        p_a = self._solve_monotone(g, hi=w_b.p, grow=False)
        ahead = State(p_a, 0.0, w_b.s)
        behind, _ = self.shock_to(ahead, w_b.p, direction)
        du = w_b.u - behind.u
        return State(p_a, du, w_b.s)

    @staticmethod
    def _solve_monotone(g, lo=None, hi=None, grow=True, tol=1e-14,
                        max_iter=200):
        """Root of decreasing g on (lo, hi), growing the open end by doubling."""
        if grow:
            a = lo
            step = max(lo, 1e-8)
            b = lo + step
            it = 0
            while g(b) > 0.0:
                step *= 2.0
                b = lo + step
                it += 1
                if it > 400:
                    raise NoConvergence("bracket growth failed")
        else:
            b = hi
            a = hi * 0.5
            it = 0
            while g(a) < 0.0:
                a *= 0.5
                it += 1
                if a <= 0.0 or it > 2000:
                    raise NoConvergence("bracket shrink failed")
        # bisection with relative tolerance (g decreasing: g(a) >= 0 >= g(b))
        for _ in range(max_iter):
            m = 0.5 * (a + b)
            if b - a <= tol * m:
                return m
            if g(m) > 0.0:
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    # -- generalized Riemann solver ---------------------------------------
    def check_vacuum(self, w_L, w_R):
        z_l = self.eos.riemann_coordinate(w_L.p)
        z_r = self.eos.riemann_coordinate(w_R.p)
        if w_R.u - w_L.u >= z_l + z_r:
            raise VacuumError(
                f"vacuum: velocity gap {w_R.u - w_L.u:g} >= z_l + z_r = "
                f"{z_l + z_r:g}")

    def _phi(self, p, w_side, direction, force_simple):
        """Velocity of the middle state reached from ``w_side`` at pressure p.

        Decreasing in p for the backward side, increasing for the forward
        side; the shock branch engages only above the side pressure when
        not forced simple.
        """
        eos = self.eos
        simple = force_simple or p <= w_side.p
        if simple:
            dz = eos.riemann_coordinate(w_side.p) - eos.riemann_coordinate(p)
            offs = dz
        else:
            dp = p - w_side.p
            dv = eos.specific_volume(w_side.p) - eos.specific_volume(p)
            offs = -math.sqrt(max(dp * dv, 0.0))
        # backward: u_mid = u_L + offs ; forward: u_mid = u_R - offs
        return w_side.u + offs if direction == Family.BACKWARD else w_side.u - offs

    def _phi_prime(self, p, w_side, direction, force_simple):
        eos = self.eos
        simple = force_simple or p <= w_side.p
        if simple:
            d = -1.0 / eos.impedance(p)
        else:
            dp = p - w_side.p
            v_s = eos.specific_volume(w_side.p)
            v_p = eos.specific_volume(p)
            dv = v_s - v_p
            D = dp * dv
            if D <= 0.0:
                d = -1.0 / eos.impedance(p)
            else:
                vprime = -v_p / (self.eos.gamma * p)
                d = -(dv - dp * vprime) / (2.0 * math.sqrt(D))
        return d if direction == Family.BACKWARD else -d

    def solve_grp(self, w_L, w_R, widths=(0.0, 0.0), tol=1e-13, max_iter=100):
        """Middle state and both waves of the generalized Riemann problem.

        A positive width forces the simple branch of that family (admitting
        centered compressions); width zero selects the elementary branch:
        shock if compressive, rarefaction if expansive.  Returns
        (w_mid, backward GRPWave or None, forward GRPWave or None); a wave
        is None when its strength vanishes identically.
        """
        self.check_vacuum(w_L, w_R)
        force_b = widths[0] > 0.0
        force_f = widths[1] > 0.0

        def g(p):
            return (self._phi(p, w_L, Family.BACKWARD, force_b)
                    - self._phi(p, w_R, Family.FORWARD, force_f))

        def gp(p):
            return (self._phi_prime(p, w_L, Family.BACKWARD, force_b)
                    - self._phi_prime(p, w_R, Family.FORWARD, force_f))

        if w_L.p == w_R.p and w_L.u == w_R.u:
            p_mid = w_L.p
        else:
            p_mid = self._solve_pmid(g, gp, w_L, w_R, tol, max_iter)
        u_mid = self._phi(p_mid, w_L, Family.BACKWARD, force_b)
        w_mid = State(p_mid, u_mid, w_L.s)

        # jumps below the p_mid solver's own precision are numerical
        # residue; their least-squares speeds would be pure noise
        z = self.eos.riemann_coordinate
        scale_p = max(w_L.p, w_R.p, p_mid)
        scale_u = abs(w_L.u) + abs(w_R.u) + z(w_L.p) + z(w_R.p)
        back = self._grp_wave(w_L, w_mid, Family.BACKWARD, force_b,
                              widths[0], scale_p, scale_u)
        fwd = self._grp_wave(w_mid, w_R, Family.FORWARD, force_f,
                             widths[1], scale_p, scale_u)
        return w_mid, back, fwd

    def _grp_wave(self, w_l, w_r, family, force_simple, width,
                  scale_p=None, scale_u=0.0):
        w_a, w_b = self.ahead_behind(w_l, w_r, family)
        tol_p = max(1e-15 * w_a.p, 1e-12 * (scale_p or 0.0))
        tol_u = max(1e-15, 1e-12 * scale_u)
        if abs(w_b.p - w_a.p) < tol_p and abs(w_r.u - w_l.u) < tol_u:
            return None
        use_shock = (not force_simple) and w_b.p > w_a.p
        branch = SHOCK if use_shock else SIMPLE
        sigma = None
        if use_shock:
            _, sigma = self.shock_to(w_a, w_b.p, family)
        zeta = self.wave_strength(w_l, w_r, family, branch, validate=False)
        return GRPWave(family, branch, w_l, w_r, zeta, sigma,
                       width if branch == SIMPLE else 0.0)

    def _solve_pmid(self, g, gp, w_L, w_R, tol, max_iter):
        """Safeguarded Newton on the decreasing function g(p_mid)."""
        eos = self.eos
        # initial guess: the two-rarefaction closed form
        z0 = 0.5 * (eos.riemann_coordinate(w_L.p) + eos.riemann_coordinate(w_R.p)
                    + w_L.u - w_R.u)
        if z0 > 0.0:
            p = eos.pressure_from_z(z0)
        else:
            p = 1e-8 * min(w_L.p, w_R.p)
        # bracket: g(lo) > 0 > g(hi)
        lo, hi = 0.0, max(w_L.p, w_R.p)
        it = 0
        while g(hi) > 0.0:
            hi *= 2.0
            it += 1
            if it > 200:
                raise NoConvergence("no upper bracket for p_mid")
        if not (lo < p < hi):
            p = 0.5 * (lo + hi) if lo > 0 else 0.5 * hi
        for _ in range(max_iter):
            val = g(p)
            if val > 0.0:
                lo = p
            else:
                hi = p
            der = gp(p)
            p_new = p - val / der if der != 0.0 else 0.5 * (lo + hi)
            if not (lo < p_new < hi):
                p_new = 0.5 * (lo + hi)
            if abs(p_new - p) <= tol * p:
                return p_new
            p = p_new
        raise NoConvergence("p_mid iteration budget exhausted")

    # -- least-squares speed and residual ---------------------------------
    def ls_speed_residual(self, w_l, w_r, direction, branch=SIMPLE,
                          validate=True):
        """(a_*, R_*, beta): preconditioned least-squares speed and residual.

        Simple waves minimize |A([f]-s[q])| with the diagonal weights
        (<1/c>/<1/c^2>, 1); in closed form a_* = ±(beta+1)/(2<1/c>) and
        |R_*| = |[p](beta-1)|/sqrt(2).  Shocks use the exact sigma with
        identically zero residual.
        """
        if validate:
            self._validate_on_curve(w_l, w_r, direction, branch, 1e-10)
        _, _, beta = self.eos.averages(w_l.p, w_r.p)
        if branch == SHOCK:
            w_a, w_b = self.ahead_behind(w_l, w_r, direction)
            _, sigma = self.shock_to(w_a, w_b.p, direction)
            return sigma, np.zeros(2), beta
        if w_l.p == w_r.p and w_l.u == w_r.u:
            return self.lam(w_l, direction), np.zeros(2), 1.0
        A = self.preconditioner(w_l.p, w_r.p)
        dq = A * (self.q(w_r) - self.q(w_l))
        df = A * (self.f(w_r) - self.f(w_l))
        s_star = float(dq @ df / (dq @ dq))
        r_star = df - s_star * dq
        return s_star, r_star, beta

    def residual_at(self, w_l, w_r, s):
        """Preconditioned residual vector A([f] - s[q]) of an arbitrary jump."""
        A = self.preconditioner(w_l.p, w_r.p)
        return A * ((self.f(w_r) - self.f(w_l)) - s * (self.q(w_r) - self.q(w_l)))

    def signed_scalar_residual(self, p_a, p_b):
        """Simple-wave residual magnitude [p](beta-1)/sqrt(2) (signed)."""
        _, _, beta = self.eos.averages(p_a, p_b)
        return (p_b - p_a) * (beta - 1.0) / math.sqrt(2.0)

    # -- interactions ------------------------------------------------------
    def interact_pair(self, left, right):
        """Resolve the meeting of two adjacent waves.

        ``left`` and ``right`` are GRPWave-like objects (family, kind/branch,
        states, width at the meeting time) with ``left`` spatially left.
        Returns (w_mid, backward GRPWave, forward GRPWave) with widths set by
        the nonincreasing conventions: a crossing passes each family's width
        through; a same-family merge forces that family to a shock and
        reflects a wave with the larger incident width.
        """
        w_L, w_R = left.left, right.right
        if left.family != right.family:
            # head-on crossing: the faster (forward) wave is on the left
            width_b = right.width if right.family == Family.BACKWARD else left.width
            width_f = left.width if left.family == Family.FORWARD else right.width
        else:
            reflected = max(left.width, right.width)
            if left.family == Family.BACKWARD:
                width_b, width_f = 0.0, reflected
            else:
                width_b, width_f = reflected, 0.0
        return self.solve_grp(w_L, w_R, (width_b, width_f))

    def collapse_compression(self, wave):
        """Riemann solution at the focus of a collapsing compression.

        All outgoing widths are zero: a same-family shock of the incident
        strength is transmitted and an opposite rarefaction is reflected.
        """
        return self.solve_grp(wave.left, wave.right, (0.0, 0.0))
