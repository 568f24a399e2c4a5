"""Shared vocabulary of the front-tracking scheme.

States, waves, wave sequences, point-mass residual measures, scheme
configuration and the error taxonomy.  A wave is the full bookkeeping tuple
of the scheme: signed strength, family, exact adjacent states, approximate
speed, virtual width, center, expansion rate and next interaction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np

INF = math.inf


# ---------------------------------------------------------------------------
# errors

class VacuumError(Exception):
    """Raised when the vacuum boundary p = 0 is reached or required."""


class NotAdmissible(Exception):
    """Raised for entropy-violating shock data (pressure not higher behind)."""


class NotOnCurve(Exception):
    """Raised when a state pair fails wave/shock-curve validation."""


class NoConvergence(Exception):
    """Raised when an iterative solver exhausts its budget."""


class EventBudgetExceeded(Exception):
    """Raised when a run exceeds its maximum event count."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class DegenerateWidth(Exception):
    """Raised when centering a zero-strength simple wave (equal edge speeds)."""


class ZeroJump(Exception):
    """Raised for a least-squares speed request with zero conserved jump."""


# ---------------------------------------------------------------------------
# basic types

class Family(IntEnum):
    """Wave family, ordered by characteristic speed."""

    BACKWARD = -1
    CONTACT = 0
    FORWARD = 1


class WaveKind(Enum):
    SHOCK = "shock"
    CONTACT = "contact"
    RAREFACTION = "rarefaction"
    COMPRESSION = "compression"

    @property
    def is_simple(self):
        return self in (WaveKind.RAREFACTION, WaveKind.COMPRESSION)


@dataclass(frozen=True)
class State:
    """Point in phase space: pressure, velocity and (for 3x3) entropy."""

    p: float
    u: float
    s: float | None = None

    def __post_init__(self):
        if not (self.p > 0.0) or not math.isfinite(self.p):
            raise VacuumError(f"nonpositive or nonfinite pressure p={self.p}")
        if not math.isfinite(self.u):
            raise ValueError(f"nonfinite velocity u={self.u}")
        if self.s is not None and not math.isfinite(self.s):
            raise ValueError(f"nonfinite entropy s={self.s}")

    @property
    def has_entropy(self):
        return self.s is not None


@dataclass
class Wave:
    """One tracked jump: exact states, approximate speed and virtual width.

    The trajectory is the line x(t) = x_ref + speed*(t - t_ref).  The
    virtual width is w(t) = wdot*(t - t_center), clamped at zero outside the
    wave's validity window; shocks and contacts have width identically zero.
    """

    id: int
    family: Family
    kind: WaveKind
    left: State
    right: State
    strength: float
    speed: float
    x_ref: float
    t_ref: float
    t_center: float = 0.0
    wdot: float = 0.0
    version: int = 0
    # multi-rarefaction bookkeeping
    group_id: int | None = None
    target_speed: float | None = None
    revert_time: float | None = None
    # composite bookkeeping
    carrier_id: int | None = None
    # linked-list structure (managed by WaveSequence)
    prev_id: int | None = None
    next_id: int | None = None

    def position_at(self, t):
        return self.x_ref + self.speed * (t - self.t_ref)

    def width_at(self, t):
        if not self.kind.is_simple:
            return 0.0
        return max(0.0, self.wdot * (t - self.t_center))

    @property
    def x_center(self):
        """Center abscissa; the center lies on the trajectory line."""
        return self.position_at(self.t_center)

    def edge_speeds(self, lam):
        """(left-edge, right-edge) characteristic speeds; ``lam(state)``."""
        return lam(self.left), lam(self.right)

    def edges_at(self, t, lam):
        """Virtual edge positions at time t for a simple wave."""
        lam_l, lam_r = self.edge_speeds(lam)
        xc, tc = self.x_center, self.t_center
        return xc + lam_l * (t - tc), xc + lam_r * (t - tc)


def position_at(wave, t):
    """Trajectory position x_ref + speed*(t - t_ref)."""
    return wave.position_at(t)


class WaveSequence:
    """Spatially ordered doubly-linked collection of waves plus u_0 and t."""

    def __init__(self, leftmost_state, t=0.0):
        self.leftmost_state = leftmost_state
        self.t = t
        self._waves = {}
        self.head_id = None
        self.tail_id = None

    # -- structure ---------------------------------------------------------
    def __len__(self):
        return len(self._waves)

    def __contains__(self, wave_id):
        return wave_id in self._waves

    def get(self, wave_id):
        return self._waves[wave_id]

    def __iter__(self):
        wid = self.head_id
        while wid is not None:
            w = self._waves[wid]
            yield w
            wid = w.next_id

    @property
    def waves(self):
        return list(self)

    @property
    def rightmost_state(self):
        if self.tail_id is None:
            return self.leftmost_state
        return self._waves[self.tail_id].right

    def insert_after(self, wave, after_id):
        """Insert ``wave`` after the wave ``after_id`` (None = at the head)."""
        if wave.id in self._waves:
            raise ValueError(f"duplicate wave id {wave.id}")
        if after_id is None:
            nxt = self.head_id
            wave.prev_id, wave.next_id = None, nxt
            self.head_id = wave.id
            if nxt is not None:
                self._waves[nxt].prev_id = wave.id
            else:
                self.tail_id = wave.id
        else:
            prev = self._waves[after_id]
            nxt = prev.next_id
            wave.prev_id, wave.next_id = after_id, nxt
            prev.next_id = wave.id
            if nxt is not None:
                self._waves[nxt].prev_id = wave.id
            else:
                self.tail_id = wave.id
        self._waves[wave.id] = wave

    def append(self, wave):
        self.insert_after(wave, self.tail_id)

    def remove(self, wave_id):
        w = self._waves.pop(wave_id)
        if w.prev_id is not None:
            self._waves[w.prev_id].next_id = w.next_id
        else:
            self.head_id = w.next_id
        if w.next_id is not None:
            self._waves[w.next_id].prev_id = w.prev_id
        else:
            self.tail_id = w.prev_id
        w.prev_id = w.next_id = None
        return w

    def neighbor(self, wave, side):
        """Adjacent wave on ``side`` (+1 right, -1 left) or None."""
        wid = wave.next_id if side > 0 else wave.prev_id
        return self._waves[wid] if wid is not None else None

    # -- geometry checks ---------------------------------------------------
    def validate(self, lam=None, pos_tol=1e-9, state_tol=1e-9):
        """Check adjacency, spatial order and same-family edge separation.

        ``lam`` maps (state, family) to the characteristic speed and is
        needed for the same-family overlap check; pass None to skip it.
        Raises AssertionError on violation.
        """
        t = self.t
        prev = None
        prev_state = self.leftmost_state
        for w in self:
            ds = abs(w.left.p - prev_state.p) + abs(w.left.u - prev_state.u)
            if w.left.has_entropy and prev_state.has_entropy:
                ds += abs(w.left.s - prev_state.s)
            assert ds <= state_tol, (
                f"adjacency broken at wave {w.id}: mismatch {ds:g}")
            if prev is not None:
                xp, xw = prev.position_at(t), w.position_at(t)
                assert xw >= xp - pos_tol, (
                    f"order broken: wave {prev.id} at {xp} right of "
                    f"wave {w.id} at {xw}")
                if (lam is not None and prev.family == w.family
                        and prev.kind.is_simple and w.kind.is_simple
                        and (prev.group_id is None
                             or prev.group_id != w.group_id)):
                    fam = w.family
                    _, re_prev = prev.edges_at(t, lambda s: lam(s, fam))
                    le_w, _ = w.edges_at(t, lambda s: lam(s, fam))
                    assert re_prev <= le_w + pos_tol, (
                        f"same-family overlap between waves "
                        f"{prev.id} and {w.id}")
            prev, prev_state = w, w.right
        return True


def variation(seq):
    """Total variation of the sequence: sum of absolute wave strengths."""
    return sum(abs(w.strength) for w in seq)


# ---------------------------------------------------------------------------
# residual measure

class PointMassMeasure:
    """Finite sum of vector point masses; the norm is sum of |weight|_2."""

    def __init__(self, atoms=()):
        self.atoms = [(float(x), np.asarray(wt, dtype=float)) for x, wt in atoms]

    def merged(self):
        """Combine atoms at identical locations by vector addition."""
        acc = {}
        dim = None
        for x, wt in self.atoms:
            dim = len(wt)
            if x in acc:
                acc[x] = acc[x] + wt
            else:
                acc[x] = wt.copy()
        out = PointMassMeasure()
        out.atoms = sorted(acc.items())
        del dim
        return out

    def norm(self):
        m = self.merged()
        return float(sum(np.linalg.norm(wt) for _, wt in m.atoms))

    def __add__(self, other):
        out = PointMassMeasure()
        out.atoms = self.atoms + other.atoms
        return out


# ---------------------------------------------------------------------------
# configuration

def default_q_of_eps(eps):
    return 1.0 / abs(math.log(eps))


@dataclass
class SchemeConfig:
    """Scheme thresholds: strength scale epsilon and its exponents.

    Threshold roles: e_r caps rarefaction piece strengths, [e_w, e_c] brackets
    admissible compression strengths, e_d detects initial discontinuities,
    e_i controls initial mesh variation, e_p caps passenger strengths.
    """

    epsilon: float = 0.1
    e_r: float = 1.0
    e_c: float = 1.0
    e_w: float = 2.0
    e_p: float = 1.5
    e_d: float = 1.0
    e_i: float = 1.0
    kappa: float = 0.25
    q_of_eps: object = default_q_of_eps
    composites_enabled: bool = False
    eos: object = None
    domain: tuple = (-1.0, 1.0)
    t_end: float = 0.5
    max_events: int = 1_000_000
    mr_horizon_const: float = 1.0
    strength_floor: float = 1e-13

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        if not self.e_w > self.e_c:
            raise ValueError("need e_w > e_c (weak threshold below strong)")
        if not (0.0 < self.kappa < 1.0 / 3.0):
            raise ValueError("need kappa < 1/3")
        if self.composites_enabled and not self.e_r < self.e_p:
            raise ValueError("composites require e_r < e_p")

    @property
    def e_s(self):
        return min(self.e_r, self.e_c)

    @property
    def eps_r(self):
        return self.epsilon ** self.e_r

    @property
    def eps_c(self):
        return self.epsilon ** self.e_c

    @property
    def eps_w(self):
        return self.epsilon ** self.e_w

    @property
    def eps_p(self):
        return self.epsilon ** self.e_p

    @property
    def eps_d(self):
        return self.epsilon ** self.e_d

    @property
    def eps_i(self):
        return self.epsilon ** self.e_i

    def time_tolerance(self, max_wavespeed=1.0):
        length = self.domain[1] - self.domain[0]
        return 1e-12 * (length / max(max_wavespeed, 1e-30))
