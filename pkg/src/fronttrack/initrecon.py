"""Initial wave sequences from BV data, and BV profiles from sequences.

Initialization places exact Riemann solutions (zero widths, centered at
the jump point) at every sampled discontinuity above the detection
threshold, and resolves the smooth remainder on a greedy equal-variation
mesh by per-interval generalized Riemann problems with small positive
widths, laid out in non-overlapping slots.  Reconstruction inverts the
process: shocks and contacts render as jumps, simple waves as their exact
centered fans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Family, State, WaveKind, WaveSequence
from .discretize import build_dgrs
from .engine import Engine
from .psystem import PSystem


# ---------------------------------------------------------------------------
# initial data

@dataclass
class InitialData:
    """Piecewise-constant samples: state i holds on (x_i, x_{i+1})."""

    xs: np.ndarray
    states: list

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        if len(self.xs) != len(self.states):
            raise ValueError("one state per sample point")
        if np.any(np.diff(self.xs) <= 0):
            raise ValueError("sample points must increase")

    @classmethod
    def from_function(cls, fn, domain, n):
        xs = np.linspace(domain[0], domain[1], n)
        return cls(xs, [fn(x) for x in xs])

    def jump_size(self, i):
        """Phase-space distance between pieces i-1 and i."""
        return state_distance(self.states[i - 1], self.states[i])


def state_distance(a, b):
    d = math.hypot(b.p - a.p, b.u - a.u)
    if a.has_entropy and b.has_entropy:
        d = math.hypot(d, b.s - a.s)
    return d


def detect_discontinuities(data, cfg):
    """Sample indices whose jump is at least the detection threshold."""
    return [i for i in range(1, len(data.xs))
            if data.jump_size(i) >= cfg.eps_d]


# ---------------------------------------------------------------------------
# initialization

def initialize(data, cfg, system=None, engine=None):
    """(sequence, engine): the initial wave sequence of the sampled data.

    Exact Riemann solutions at detected discontinuities; in between, a
    greedy equal-variation mesh with per-interval gRPs carrying positive
    widths in centered, non-overlapping slots.
    """
    if engine is None:
        if system is None:
            system = PSystem(cfg.eos)
        engine = Engine(system, cfg)
    system = engine.system
    seq = WaveSequence(data.states[0], t=0.0)
    cut = detect_discontinuities(data, cfg)
    bounds = [0] + cut + [len(data.xs)]
    for a, b in zip(bounds, bounds[1:]):
        if a > 0:
            # exact RP centered at the discontinuity sample point
            _place_riemann(engine, seq, data.states[a - 1], data.states[a],
                           data.xs[a], cfg)
        _mesh_segment(engine, seq, data, a, b, cfg)
    return seq, engine


def _place_riemann(engine, seq, w_l, w_r, x0, cfg):
    sys = engine.system
    if state_distance(w_l, w_r) == 0.0:
        return
    if sys.n == 2:
        _, back, fwd = sys.solve_grp(w_l, w_r)
        waves = [back, fwd]
    else:
        _, _, waves = sys.solve_grp_3(w_l, w_r)
    jumps, _ = build_dgrs([w for w in waves if w is not None], sys, cfg)
    for j in jumps:
        if abs(j.strength) < cfg.strength_floor:
            continue
        w = engine.make_wave(j.left, j.right, j.family, x0, 0.0, 0.0,
                             sigma=j.speed if j.kind == WaveKind.SHOCK
                             else None)
        if j.kind != WaveKind.SHOCK and j.family != Family.CONTACT:
            w.speed = j.speed
        seq.append(w)


def _mesh_segment(engine, seq, data, a, b, cfg):
    """Resolve samples a..b-1 (one smooth stretch) on a variation mesh."""
    sys = engine.system
    thr = min(cfg.eps_i, cfg.eps_d)
    i = a
    while i < b - 1:
        # greedy: extend the interval while the accumulated variation fits
        var = 0.0
        j = i
        while j < b - 1:
            step = data.jump_size(j + 1)
            if j > i and var + step > thr:
                break
            var += step
            j += 1
        _place_interval(engine, seq, data.states[i], data.states[j],
                        data.xs[i], data.xs[j], cfg)
        i = j


def _place_interval(engine, seq, w_a, w_b, x_a, x_b, cfg):
    """One gRP with positive widths, laid out in slots inside [x_a, x_b]."""
    sys = engine.system
    if state_distance(w_a, w_b) == 0.0:
        return
    L = x_b - x_a
    n = sys.n
    width = L / (2.0 * n)
    if sys.n == 2:
        _, back, fwd = sys.solve_grp(w_a, w_b, (width, width))
        waves = [back, fwd]
    else:
        _, _, waves = sys.solve_grp_3(w_a, w_b, (width, 0.0, width))
    live = [w for w in waves
            if w is not None and abs(w.strength) >= cfg.strength_floor]
    for k, gw in enumerate(live):
        slot_mid = x_a + L * (k + 1.0) / (len(live) + 1.0)
        w_k = width if gw.kind.is_simple else 0.0
        seq.append(_slotted_wave(engine, gw, slot_mid, w_k))


def _slotted_wave(engine, gw, slot_mid, width):
    """Build a wave whose virtual span at t=0 is centered on slot_mid."""
    sys = engine.system
    fam = gw.family
    if not gw.kind.is_simple or width <= 0.0:
        w = engine.make_wave(gw.left, gw.right, fam, slot_mid, 0.0, 0.0,
                             sigma=gw.sigma)
        return w
    lam_l = sys.lam(gw.left, fam)
    lam_r = sys.lam(gw.right, fam)
    wdot = lam_r - lam_l
    t_c = -width / wdot
    # left edge at t=0 sits at slot_mid - width/2
    x_c = slot_mid - 0.5 * width + lam_l * t_c
    w = engine.make_wave(gw.left, gw.right, fam, 0.0, 0.0, 0.0)
    w.t_center = t_c
    w.x_ref = x_c - w.speed * t_c   # center lies on the trajectory
    return w


# ---------------------------------------------------------------------------
# reconstruction

@dataclass
class FanSegment:
    x0: float
    x1: float
    family: Family
    x_c: float
    t_c: float
    t: float
    left: State
    right: State
    eos: object

    def state_at(self, x):
        xi = (x - self.x_c) / (self.t - self.t_c)
        c = self.family.value * xi
        p_lo = min(self.left.p, self.right.p)
        p_hi = max(self.left.p, self.right.p)
        if c <= 0.0:
            p = p_lo if self.family.value * self.eos.impedance(p_lo) > xi \
                else p_hi
        else:
            p = min(max(self.eos.impedance_inverse(c), p_lo), p_hi)
        z = self.eos.riemann_coordinate(p)
        if self.family == Family.FORWARD:
            u = (self.right.u
                 - self.eos.riemann_coordinate(self.right.p)) + z
        else:
            u = (self.left.u
                 + self.eos.riemann_coordinate(self.left.p)) - z
        return State(p, u, self.left.s)


class Profile:
    """Piecewise profile: breakpoints with constant and fan segments."""

    def __init__(self, leftmost_state, t):
        self.leftmost_state = leftmost_state
        self.t = t
        self.jumps = []     # (x, state_right_of_x) in increasing x
        self.fans = []      # FanSegment list, increasing x0

    def __call__(self, x):
        state = self.leftmost_state
        tie = None
        for xj, right in self.jumps:
            if xj < x:
                state = right
            elif xj == x:
                tie = (state, right)
                state = right
            else:
                break
        for fan in self.fans:
            if fan.x0 < x < fan.x1:
                return fan.state_at(x)
        if tie is not None:
            a, b = tie
            s = 0.5 * (a.s + b.s) if a.has_entropy else None
            return State(0.5 * (a.p + b.p), 0.5 * (a.u + b.u), s)
        return state

    def sample(self, xs):
        """Vectorized (p, u) arrays at the points xs."""
        xs = np.asarray(xs, dtype=float)
        jump_x = np.array([x for x, _ in self.jumps])
        states = [self.leftmost_state] + [s for _, s in self.jumps]
        idx = np.searchsorted(jump_x, xs, side="right")
        p = np.array([states[i].p for i in idx])
        u = np.array([states[i].u for i in idx])
        for fan in self.fans:
            mask = (xs > fan.x0) & (xs < fan.x1)
            for k in np.nonzero(mask)[0]:
                w = fan.state_at(xs[k])
                p[k], u[k] = w.p, w.u
        return p, u

    def variation(self):
        """Total variation of (p, u) along the profile."""
        xs = sorted({x for x, _ in self.jumps}
                    | {f.x0 for f in self.fans} | {f.x1 for f in self.fans})
        grid = []
        for a, b in zip(xs, xs[1:]):
            grid.extend(np.linspace(a, b, 20, endpoint=False))
        if xs:
            grid.append(xs[-1] + 1e-9)
            grid.insert(0, xs[0] - 1e-9)
        p, u = self.sample(np.array(grid)) if grid else (np.array([]),) * 2
        if len(p) < 2:
            return 0.0
        return float(np.sum(np.abs(np.diff(p))) + np.sum(np.abs(np.diff(u))))


def reconstruct(seq, system, t):
    """Piecewise profile of the sequence at time t.

    Shocks and contacts render as jumps at their trajectory positions;
    simple waves with positive width render as exact centered fans, with
    edges clipped so same-family fans never overlap.
    """
    prof = Profile(seq.leftmost_state, t)
    cursor = -math.inf
    waves = seq.waves
    positions = [w.position_at(t) for w in waves]
    for k, w in enumerate(waves):
        xw = max(positions[k], cursor)
        if w.kind.is_simple and w.width_at(t) > 0.0:
            fam = w.family
            le, re = w.edges_at(t, lambda s: system.lam(s, fam))
            le = max(le, cursor)
            nxt = positions[k + 1] if k + 1 < len(waves) else math.inf
            re = min(re, nxt)
            if re > le:
                eos = system.eos if system.n == 2 \
                    else system._eos_at(w.left.s)
                prof.fans.append(FanSegment(le, re, fam, w.x_center,
                                            w.t_center, t, w.left, w.right,
                                            eos))
                # jumps at fan edges carry the states into the fan
                prof.jumps.append((le, w.left))
                prof.jumps.append((re, w.right))
                cursor = re
                continue
            # degenerate span: fall through to a plain jump
        prof.jumps.append((xw, w.right))
        cursor = xw
    prof.jumps.sort(key=lambda xr: xr[0])
    return prof
