"""Named test scenarios and reference constructions.

Besides the standard Riemann-type corpora (Sod-like tube, colliding
shocks, a single rarefaction, a compressive ramp), this module builds
the periodic cycle of states behind a strong backward shock: a closed
chain in the (z, u) plane alternating backward rarefactions and shocks
of one fixed strength with forward waves between them.  The cycle
closes only when the common strength exceeds a critical value, found
here by bisection; the resulting states furnish cyclic initial data
whose evolution stresses the event loop.

A first-order finite-volume solver (Rusanov flux) provides an
independent reference solution for cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, fsolve

from .core import Family, SchemeConfig, State
from .eos import GammaLawEOS
from .initrecon import InitialData, initialize
from .psystem import PSystem

BACK, FWD = Family.BACKWARD, Family.FORWARD


class NoBracketError(Exception):
    """Raised when a critical-strength scan finds no sign change."""


# ---------------------------------------------------------------------------
# the periodic cycle of states

@dataclass
class CycleStates:
    """Closed chain of states behind a persistent backward shock.

    Starting from w0, a backward rarefaction of strength zeta leads to
    w1, a backward shock of strength -zeta to w4, a forward shock of
    strength -beta to w2; w3 and w5 close the chain through the inverse
    backward maps at strengths zeta and -zeta.  beta is chosen so that
    w1, w2 and w5 lie on one forward simple-wave curve.
    """

    eos: GammaLawEOS
    z0: float
    zeta: float
    beta: float
    w0: State
    w1: State
    w2: State
    w3: State
    w4: State
    w5: State

    @property
    def z5(self):
        return self.eos.riemann_coordinate(self.w5.p)

    @property
    def closes(self):
        """The chain closes into a periodic pattern iff z5 < z0."""
        return self.z5 < self.z0

    def states(self):
        return [self.w0, self.w1, self.w2, self.w3, self.w4, self.w5]


def build_cycle(zeta, z0=1.0, eos=None):
    """CycleStates at the given backward strength zeta in (0, z0)."""
    if eos is None:
        eos = GammaLawEOS(gamma=1.4, K=1.0)
    if not 0.0 < zeta < z0:
        raise ValueError("need 0 < zeta < z0 (vacuum bound)")
    sys = PSystem(eos)
    z = eos.riemann_coordinate
    w0 = State(eos.pressure_from_z(z0), 0.0)
    w1 = sys.w_map(w0, zeta, BACK)
    w4 = sys.s_map(w1, -zeta, BACK)

    # collinearity: w2 on the forward curve of w1 fixes the strength beta
    def gap(beta):
        w2 = sys.s_map(w4, -beta, FWD)
        return (w2.u - z(w2.p)) - (w1.u - z(w1.p))

    hi = max(zeta, 1e-6)
    while gap(hi) < 0.0:
        hi *= 2.0
    beta = brentq(gap, 1e-14, hi, xtol=1e-15, rtol=8.9e-16)
    w2 = sys.s_map(w4, -beta, FWD)
    w3 = sys.w_map_T(w2, zeta, BACK)
    w5 = sys.s_map_T(w3, -zeta, BACK)
    return CycleStates(eos, z0, zeta, beta, w0, w1, w2, w3, w4, w5)


@dataclass
class LeadingShock:
    """Ahead state of the persistent backward shock closing the cycle.

    Both w5 and w0 connect to w_L by backward shocks, of strengths
    -alpha*zeta and -(1+alpha)*zeta respectively.
    """

    w_L: State
    alpha: float
    closure_defect: float   # velocity mismatch of the fourth, implied target


def solve_leading(cycle):
    """Solve for the leading-shock ahead state w_L and ratio alpha."""
    eos, sys = cycle.eos, PSystem(cycle.eos)
    z = eos.riemann_coordinate
    zeta, z5 = cycle.zeta, cycle.z5
    if not cycle.closes:
        raise NoBracketError("cycle does not close: z5 >= z0")

    def eqs(x):
        zL, uL, al = x
        if zL <= 0.0 or al <= 0.0:
            return [1e3, 1e3, 1e3]
        wL = State(eos.pressure_from_z(zL), uL)
        a5 = sys.s_map(wL, -al * zeta, BACK)
        a0 = sys.s_map(wL, -(1.0 + al) * zeta, BACK)
        return [z(a5.p) - z5, a5.u - cycle.w5.u, z(a0.p) - cycle.z0]

    x0 = [0.5 * z5, cycle.w5.u + z5, max(1.0, z5 / zeta)]
    sol, _, ier, msg = fsolve(eqs, x0, full_output=True, xtol=1e-13)
    if ier != 1:
        raise NoBracketError(f"leading-shock solve failed: {msg}")
    zL, uL, alpha = sol
    wL = State(eos.pressure_from_z(zL), uL)
    a0 = sys.s_map(wL, -(1.0 + alpha) * zeta, BACK)
    return LeadingShock(wL, float(alpha), float(a0.u - cycle.w0.u))


@dataclass
class CriticalStrength:
    """Bifurcation point of cycle closure in the strength parameter."""

    zeta: float            # per-wave critical strength
    combined: float        # total strength of the four cycle simple waves
    z0: float
    sign_changes: int


def critical_strength(z0=1.0, eos=None, rtol=1e-10, n_scan=200,
                      scan_window=(1e-5, 0.995)):
    """Smallest strength at which the cycle closes, by scan + bisection.

    Scans z5(zeta) - z0 over (0, z0); a unique sign change brackets the
    critical strength, refined by bisection to relative tolerance rtol.
    Raises NoBracketError when the scan finds no sign change.
    """
    if eos is None:
        eos = GammaLawEOS(gamma=1.4, K=1.0)

    def g(zeta):
        c = build_cycle(zeta, z0, eos)
        return c.z5 - z0

    # concentrate scan points near the vacuum bound z0, where the closure
    # gap crosses zero for stiffer equations of state; the window gives
    # the scanned distances from z0 as fractions of z0
    grid = z0 * (1.0 - np.geomspace(*scan_window, n_scan))[::-1]
    vals = [g(zt) for zt in grid]
    idx = [k for k in range(len(vals) - 1) if vals[k] * vals[k + 1] < 0.0]
    if not idx:
        raise NoBracketError(
            f"no sign change of z5 - z0 over ({grid[0]:g}, {grid[-1]:g})")
    k = idx[0]
    zeta = brentq(g, grid[k], grid[k + 1], rtol=rtol, xtol=1e-300)
    return CriticalStrength(zeta=float(zeta), combined=4.0 * float(zeta),
                            z0=z0, sign_changes=len(idx))


def shock_mach_proxy(sigma, p_ahead, eos):
    """|sigma| over the Lagrangian sound speed of the ahead state."""
    return abs(sigma) / eos.impedance(p_ahead)


# ---------------------------------------------------------------------------
# cyclic initial data

def cyclic_initial_data(eos=None, zeta=None, z0=None, n_periods=3,
                        domain=(-1.0, 1.0), margin=0.35):
    """Piecewise-constant data realizing the periodic cycle.

    One leading backward shock into w_L on the left, then repeated
    periods of the closed chain: forward rarefaction (w1|w5), backward
    shock (w5|w3), backward rarefaction (w3|w2), forward compression
    (w2|w1).  Every consecutive pair lies exactly on a single wave
    curve.  By default z0 is chosen so the reference pressure is one,
    and zeta sits a little above the critical strength.
    """
    if eos is None:
        eos = GammaLawEOS(gamma=1.4, K=1.0)
    if z0 is None:
        z0 = eos.riemann_coordinate(1.0)
    if zeta is None:
        crit = critical_strength(z0, eos, rtol=1e-8)
        zeta = crit.zeta + min(0.02 * z0, 0.5 * (z0 - crit.zeta))
    cycle = build_cycle(zeta, z0, eos)
    lead = solve_leading(cycle)
    chain = [lead.w_L, cycle.w0, cycle.w1]
    for _ in range(n_periods):
        chain += [cycle.w5, cycle.w3, cycle.w2, cycle.w1]
    a, b = domain
    span = b - a
    xs = np.linspace(a + margin * span, b - margin * span, len(chain))
    xs[0] = a   # leading far field reaches the left edge
    return InitialData(xs, chain), cycle, lead


# ---------------------------------------------------------------------------
# scenario registry

@dataclass
class Scenario:
    name: str
    eos: GammaLawEOS
    builder: object          # n_samples -> InitialData
    domain: tuple
    t_end: float
    description: str = ""

    def data(self, n=400):
        return self.builder(n)

    def config(self, epsilon, **kw):
        kw.setdefault("domain", self.domain)
        kw.setdefault("t_end", self.t_end)
        return SchemeConfig(epsilon=epsilon, eos=self.eos, **kw)


def _step_builder(domain, x_jump, left, right):
    def build(n=400):
        xs = np.linspace(domain[0], domain[1], n)
        return InitialData(xs, [left if x < x_jump else right for x in xs])
    return build


def _make_registry():
    eos14 = GammaLawEOS(gamma=1.4, K=1.0)
    eos2 = GammaLawEOS(gamma=2.0, K=1.0)
    sys14 = PSystem(eos14)
    reg = {}

    reg["sod_like"] = Scenario(
        "sod_like", eos14,
        _step_builder((-1, 1), 0.0, State(1.0, 0.0), State(0.1, 0.0)),
        (-1.0, 1.0), 0.3,
        "pressure-jump tube: backward rarefaction and forward shock")

    reg["two_shock"] = Scenario(
        "two_shock", eos14,
        _step_builder((-1, 1), 0.0, State(1.0, 0.8), State(1.0, -0.8)),
        (-1.0, 1.0), 0.3,
        "colliding streams: two outgoing shocks, zero residual")

    behind = sys14.simple_wave_to(State(1.0, 0.0), 0.4, FWD)
    reg["single_rarefaction"] = Scenario(
        "single_rarefaction", eos14,
        _step_builder((-1, 1), 0.0, behind, State(1.0, 0.0)),
        (-1.0, 1.0), 0.3,
        "one forward rarefaction, discretized into weak pieces")

    def ramp(n=400):
        def fn(x):
            p = 1.0 + 0.6 * min(max(x, 0.0), 1.0)
            return State(p, -eos14.riemann_coordinate(p))
        return InitialData.from_function(fn, (-0.2, 1.2), n)

    reg["compressive_ramp"] = Scenario(
        "compressive_ramp", eos14, ramp, (-0.2, 1.2), 0.3,
        "smooth backward-compressive ramp focusing into a shock")

    def cyc(eos):
        def build(n=0):
            data, _, _ = cyclic_initial_data(eos)
            return data
        return build

    reg["cycle_gamma14"] = Scenario(
        "cycle_gamma14", eos14, cyc(eos14), (-1.0, 1.0), 10.0,
        "periodic cycle behind a strong backward shock, gamma = 1.4")
    reg["cycle_gamma2"] = Scenario(
        "cycle_gamma2", eos2, cyc(eos2), (-1.0, 1.0), 10.0,
        "periodic cycle behind a strong backward shock, gamma = 2")
    return reg


SCENARIOS = _make_registry()


def get_scenario(name):
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; "
                       f"choose from {sorted(SCENARIOS)}") from None


def run_scenario(name, epsilon, t_end=None, n_samples=400, **cfg_kw):
    """Initialize and advance a registry scenario; returns the RunRecord."""
    sc = get_scenario(name)
    cfg = sc.config(epsilon, **cfg_kw)
    seq, eng = initialize(sc.data(n_samples), cfg,
                          system=PSystem(sc.eos))
    return eng.advance(seq, t_end=t_end)


# ---------------------------------------------------------------------------
# finite-volume reference

def reference_fv(data, eos, n_cells, t_end, domain, cfl=0.45):
    """First-order Rusanov finite-volume solution of the p-system.

    Conserved variables (v, u) with fluxes (-u, p(v)); outflow
    boundaries.  Returns (cell centers, p, u) at t_end.
    """
    a, b = domain
    edges = np.linspace(a, b, n_cells + 1)
    xc = 0.5 * (edges[:-1] + edges[1:])
    dx = (b - a) / n_cells
    p0, u = _sample_data(data, xc)
    gamma, K = eos.gamma, eos.K
    v = (K / p0) ** (1.0 / gamma)

    def pressure(v):
        return K * v ** (-gamma)

    def sound(v):
        return np.sqrt(gamma * K * v ** (-gamma - 1.0))

    t = 0.0
    while t < t_end:
        c = sound(v)
        dt = min(cfl * dx / c.max(), t_end - t)
        ve = np.concatenate(([v[0]], v, [v[-1]]))
        ue = np.concatenate(([u[0]], u, [u[-1]]))
        pe = pressure(ve)
        ce = sound(ve)
        amax = np.maximum(ce[:-1], ce[1:])
        # interface fluxes for (v, u): F = (-u, p)
        f1 = -0.5 * (ue[:-1] + ue[1:]) - 0.5 * amax * (ve[1:] - ve[:-1])
        f2 = 0.5 * (pe[:-1] + pe[1:]) - 0.5 * amax * (ue[1:] - ue[:-1])
        v = v - dt / dx * (f1[1:] - f1[:-1])
        u = u - dt / dx * (f2[1:] - f2[:-1])
        t += dt
    return xc, pressure(v), u


def _sample_data(data, xs):
    idx = np.searchsorted(data.xs, xs, side="right") - 1
    idx = np.clip(idx, 0, len(data.states) - 1)
    p = np.array([data.states[i].p for i in idx])
    u = np.array([data.states[i].u for i in idx])
    return p, u


def fv_self_convergence(data, eos, n_cells, t_end, domain, cfl=0.45):
    """L1 gap between the n-cell and 2n-cell reference solutions."""
    x1, p1, u1 = reference_fv(data, eos, n_cells, t_end, domain, cfl)
    _, p2, u2 = reference_fv(data, eos, 2 * n_cells, t_end, domain, cfl)
    p2c = 0.5 * (p2[0::2] + p2[1::2])
    u2c = 0.5 * (u2[0::2] + u2[1::2])
    dx = (domain[1] - domain[0]) / n_cells
    return float(np.sum(np.abs(p1 - p2c) + np.abs(u1 - u2c)) * dx)
