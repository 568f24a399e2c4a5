"""Event-driven front-tracking loop.

Waves move along straight trajectories between events.  Events are pair
interactions (trajectories meet), self-collapses (a compression's width
reaches zero) and multi-rarefaction reverts (temporary speeds switch to
their targets).  Each interaction removes the incident waves and inserts
the jumps of a discretized generalized Riemann solution at the interaction
point, with virtual widths assigned by nonincreasing conventions, moderate
compressions forced to shocks outside the admissible strength band,
same-family virtual overlap repaired by width reduction, and moderate
rarefactions split (as multi-rarefactions when they carry positive width).
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import (
    EventBudgetExceeded,
    Family,
    State,
    VacuumError,
    Wave,
    WaveKind,
)
from .discretize import ls_speed_generic, split_rarefaction, wave_preconditioner
from .psystem import PSystem, SHOCK, SIMPLE


class EventKind(Enum):
    PAIR = "pair"
    COLLAPSE = "collapse"
    REVERT = "revert"


@dataclass(order=True)
class _QueueItem:
    t: float
    x: float
    seq_no: int
    kind: EventKind = field(compare=False)
    ids: tuple = field(compare=False)
    versions: tuple = field(compare=False)


@dataclass
class EventRecord:
    index: int
    t: float
    x: float
    kind: str
    in_ids: tuple
    in_strengths: tuple
    out_ids: tuple
    out_families: tuple
    out_strengths: tuple
    out_speeds: tuple
    out_widths: tuple
    variation_after: float
    residual_norm_after: float
    raw_residual_norm_after: float
    wave_count_after: int


@dataclass
class RunRecord:
    """Everything a completed (or aborted) run exposes to diagnostics."""

    config: object
    system: object
    events: list = field(default_factory=list)
    time_series: list = field(default_factory=list)
    sequence: object = None
    t_final: float = 0.0
    t_start: float = 0.0
    initial_q_integral: object = None
    # (t, leftmost_state, [(x, state_right_of_x), ...]) at t_start
    initial_pieces: object = None
    drift_integral: object = None
    res_integral: float = 0.0
    raw_res_integral: float = 0.0
    accumulation_flag: bool = False
    aborted: str | None = None
    snapshots: list | None = None

    @property
    def event_count(self):
        return len(self.events)


def pair_interaction_point(a, b, now, tol=0.0):
    """Meeting point of two trajectory lines, or None.

    Requires the left wave to be faster; meetings before ``now`` are stale.
    """
    ds = a.speed - b.speed
    if ds <= 0.0:
        return None
    num = (b.x_ref - b.speed * b.t_ref) - (a.x_ref - a.speed * a.t_ref)
    t = num / ds
    if t < now - tol:
        return None
    t = max(t, now)
    return t, a.position_at(t)


def self_collapse_time(w, now=-math.inf):
    """Width-zero instant of a compression; None for other kinds."""
    if w.kind != WaveKind.COMPRESSION or w.wdot >= 0.0:
        return None
    if w.t_center <= now:
        return None
    return w.t_center


class Engine:
    """Single-writer event loop over one wave sequence."""

    def __init__(self, system, cfg):
        self.system = system
        self.cfg = cfg
        self._ids = itertools.count(1)
        self._groups = itertools.count(1)
        self._seq_no = itertools.count()
        self._heap = []
        self._time_tol = cfg.time_tolerance()
        self._pos_tol = 1e-12 * max(1.0, cfg.domain[1] - cfg.domain[0])
        # incremental bookkeeping
        self._variation = 0.0
        self._res_norm = 0.0
        self._raw_res_norm = 0.0
        self._drift_rate = None

    def new_id(self):
        return next(self._ids)

    # ------------------------------------------------------------------
    # per-wave bookkeeping

    def _wave_residual(self, w):
        dq = self.system.q(w.right) - self.system.q(w.left)
        df = self.system.f(w.right) - self.system.f(w.left)
        raw = df - w.speed * dq
        A = wave_preconditioner(self.system, w.left, w.right)
        if A.ndim == 1:
            pre = A * raw
        else:
            pre = A @ raw
        return raw, float(np.linalg.norm(pre)), float(np.linalg.norm(raw))

    def _account_add(self, w):
        raw, pre_n, raw_n = self._wave_residual(w)
        w._raw_res = raw
        w._res_norm = pre_n
        w._raw_res_norm = raw_n
        self._variation += abs(w.strength)
        self._res_norm += pre_n
        self._raw_res_norm += raw_n
        self._drift_rate = self._drift_rate - raw if self._drift_rate is not None \
            else -raw

    def _account_remove(self, w):
        self._variation -= abs(w.strength)
        self._res_norm -= w._res_norm
        self._raw_res_norm -= w._raw_res_norm
        self._drift_rate = self._drift_rate + w._raw_res

    def _reaccount_speed(self, w):
        """Refresh cached residuals after a speed change."""
        self._account_remove(w)
        self._account_add(w)

    # ------------------------------------------------------------------
    # wave construction

    def make_wave(self, jump_left, jump_right, family, x, t, width,
                  speed=None, sigma=None, force_kind=None):
        """Build a wave through (x, t) carrying virtual width ``width``."""
        sys = self.system
        if family == Family.CONTACT:
            kind = WaveKind.CONTACT
            speed = 0.0
            strength = sys.wave_strength(jump_left, jump_right, family)
            wdot = 0.0
            t_center = t
        else:
            if sigma is not None:
                kind = WaveKind.SHOCK
                speed = sigma
            else:
                strength_probe = self._strength(jump_left, jump_right, family,
                                                SIMPLE)
                kind = (WaveKind.RAREFACTION if strength_probe > 0
                        else WaveKind.COMPRESSION)
            if force_kind is not None:
                kind = force_kind
            branch = SHOCK if kind == WaveKind.SHOCK else SIMPLE
            strength = self._strength(jump_left, jump_right, family, branch)
            lam_l = sys.lam(jump_left, family)
            lam_r = sys.lam(jump_right, family)
            wdot = lam_r - lam_l
            if kind == WaveKind.SHOCK:
                t_center, width = t, 0.0
            else:
                if speed is None:
                    speed = self._ls_speed(jump_left, jump_right)
                if width > 0.0 and wdot != 0.0:
                    t_center = t - width / wdot
                else:
                    t_center = t
        if speed is None:
            speed = self._ls_speed(jump_left, jump_right)
        return Wave(id=self.new_id(), family=family, kind=kind,
                    left=jump_left, right=jump_right, strength=strength,
                    speed=speed, x_ref=x, t_ref=t, t_center=t_center,
                    wdot=wdot)

    def _strength(self, w_l, w_r, family, branch):
        if isinstance(self.system, PSystem):
            return self.system.wave_strength(w_l, w_r, family, branch,
                                             validate=False)
        return self.system.wave_strength(w_l, w_r, family)

    def _ls_speed(self, w_l, w_r):
        sys = self.system
        dq = sys.q(w_r) - sys.q(w_l)
        df = sys.f(w_r) - sys.f(w_l)
        A = wave_preconditioner(sys, w_l, w_r)
        s, _ = ls_speed_generic(dq, df, A)
        return s

    # ------------------------------------------------------------------
    # scheduling

    def _push(self, t, x, kind, ids, versions):
        heapq.heappush(self._heap, _QueueItem(t, x, next(self._seq_no),
                                              kind, ids, versions))

    def schedule_wave(self, seq, w):
        """(Re)queue every event the wave can be part of."""
        now = seq.t
        for side in (-1, +1):
            nb = seq.neighbor(w, side)
            if nb is None:
                continue
            a, b = (nb, w) if side < 0 else (w, nb)
            hit = pair_interaction_point(a, b, now, self._time_tol)
            if hit is not None:
                self._push(hit[0], hit[1], EventKind.PAIR, (a.id, b.id),
                           (a.version, b.version))
        tc = self_collapse_time(w, now)
        if tc is not None:
            self._push(tc, w.position_at(tc), EventKind.COLLAPSE,
                       (w.id,), (w.version,))

    def schedule_all(self, seq):
        groups = {}
        for w in seq:
            if w.group_id is not None:
                groups.setdefault(w.group_id, []).append(w)
        for members in groups.values():
            t_rev = members[0].revert_time
            self._push(t_rev, members[0].position_at(t_rev), EventKind.REVERT,
                       tuple(w.id for w in members),
                       tuple(w.version for w in members))
        for w in seq:
            tc = self_collapse_time(w, seq.t)
            if tc is not None:
                self._push(tc, w.position_at(tc), EventKind.COLLAPSE,
                           (w.id,), (w.version,))
            nb = seq.neighbor(w, +1)
            if nb is None:
                continue
            hit = pair_interaction_point(w, nb, seq.t, self._time_tol)
            if hit is not None:
                self._push(hit[0], hit[1], EventKind.PAIR, (w.id, nb.id),
                           (w.version, nb.version))

    def _stale(self, seq, item):
        for wid, ver in zip(item.ids, item.versions):
            if wid not in seq or seq.get(wid).version != ver:
                return True
        if item.kind == EventKind.PAIR:
            a, b = (seq.get(w) for w in item.ids)
            if a.next_id != b.id:
                return True
        return False

    # ------------------------------------------------------------------
    # interaction resolution

    def _gather_incident(self, seq, a, b, t, x):
        """Maximal run of adjacent waves meeting (x, t) within tolerance."""
        waves = [a, b]
        tol = self._pos_tol + 1e-9 * abs(x)
        left = seq.neighbor(a, -1)
        while left is not None and abs(left.position_at(t) - x) <= tol \
                and left.speed > b.speed:
            waves.insert(0, left)
            left = seq.neighbor(left, -1)
        right = seq.neighbor(b, +1)
        while right is not None and abs(right.position_at(t) - x) <= tol \
                and right.speed < a.speed:
            waves.append(right)
            right = seq.neighbor(right, +1)
        return waves

    def _incident_widths(self, incident, t):
        """Per-family width assignment of the emergent generalized RP."""
        by_family = {}
        for w in incident:
            by_family.setdefault(w.family, []).append(w)
        all_widths = [w.width_at(t) for w in incident]
        widths = {}
        for fam in self.system.families():
            if fam == Family.CONTACT:
                widths[fam] = 0.0
            elif fam not in by_family:
                widths[fam] = max(all_widths) if all_widths else 0.0
            elif len(by_family[fam]) == 1:
                w = by_family[fam][0]
                widths[fam] = w.width_at(t) if w.kind.is_simple else 0.0
            else:
                widths[fam] = 0.0  # same-family merge emerges as a shock
        return widths

    def _solve(self, w_L, w_R, widths):
        """System dispatch: family-ordered GRPWave list."""
        if self.system.n == 2:
            _, back, fwd = self.system.solve_grp(
                w_L, w_R, (widths[Family.BACKWARD], widths[Family.FORWARD]))
            return [back, fwd]
        _, _, waves = self.system.solve_grp_3(
            w_L, w_R, (widths[Family.BACKWARD], 0.0, widths[Family.FORWARD]))
        return waves

    def enforce_compression_thresholds(self, w_L, w_R, widths):
        """Solve the gRP, forcing out-of-band compressions to shocks.

        Emergent compressions must have strength in [-eps^e_c, -eps^e_w];
        stronger or weaker ones get their width zeroed (strongest first) and
        the problem is re-solved.  Zeroed widths stay zero.
        """
        cfg = self.cfg
        for _ in range(self.system.n):
            waves = self._solve(w_L, w_R, widths)
            worst, worst_mag = None, 0.0
            for gw in waves:
                if gw is None or gw.branch != SIMPLE:
                    continue
                if gw.family == Family.CONTACT or gw.strength >= 0.0:
                    continue
                if widths[gw.family] <= 0.0:
                    continue
                z = gw.strength
                if z < -cfg.eps_c or z > -cfg.eps_w:
                    if abs(z) > worst_mag:
                        worst, worst_mag = gw.family, abs(z)
            if worst is None:
                return waves, widths
            widths[worst] = 0.0
        return self._solve(w_L, w_R, widths), widths

    # ------------------------------------------------------------------
    # overlap reduction

    def reduce_overlap(self, seq, neighbor, x_evt, t_evt, side):
        """Shrink a same-family neighbor whose virtual edge spans the event.

        ``side`` is +1 when the neighbor lies right of the event.  The
        neighbor keeps its trajectory and speed; its center slides along the
        trajectory so the width scales by a factor strictly below the
        crossing ratio.  Returns True if the neighbor changed.
        """
        if neighbor is None or not neighbor.kind.is_simple:
            return False
        w_now = neighbor.width_at(t_evt)
        if w_now <= 0.0:
            return False
        fam = neighbor.family
        lam = lambda s: self.system.lam(s, fam)
        le, re = neighbor.edges_at(t_evt, lam)
        xp = neighbor.position_at(t_evt)
        if side > 0:
            if le > x_evt:
                return False
            denom = xp - le
            factor = (xp - x_evt) / denom if denom > 0 else 0.0
        else:
            if re < x_evt:
                return False
            denom = re - xp
            factor = (x_evt - xp) / denom if denom > 0 else 0.0
        factor = max(0.0, min(factor, 1.0)) * (1.0 - 1e-9)
        new_w = w_now * factor
        if neighbor.wdot != 0.0:
            neighbor.t_center = t_evt - new_w / neighbor.wdot
        neighbor.version += 1
        return True

    def _cap_outgoing_width(self, wave_spec_width, lam_edge, speed, wdot,
                            x_evt, bound, side):
        """Largest width keeping the outgoing virtual edge inside ``bound``."""
        if wdot == 0.0:
            return wave_spec_width
        offset = (lam_edge - speed) / wdot
        if side > 0:
            if offset <= 0.0:
                return wave_spec_width
            cap = (bound - x_evt) / offset
        else:
            if offset >= 0.0:
                return wave_spec_width
            cap = (bound - x_evt) / offset
        return max(0.0, min(wave_spec_width, cap))

    # ------------------------------------------------------------------
    # emergent wave materialization

    def _materialize(self, seq, grp_waves, widths, x_evt, t_evt):
        """Turn the solved gRP into Wave records inserted at the event point.

        Handles overlap reduction against the outer neighbors, rarefaction
        splitting and multi-rarefaction creation.  ``seq`` must already have
        the incident waves removed, with the insertion slot after
        ``self._insert_after``.
        """
        cfg = self.cfg
        live = [gw for gw in grp_waves
                if gw is not None and abs(gw.strength) >= cfg.strength_floor]
        self._repair_neighbors(seq, {gw.family for gw in live}, x_evt, t_evt)
        out = []
        for gw in live:
            fam = gw.family
            width = widths.get(fam, 0.0) if gw.branch == SIMPLE else 0.0
            if gw.branch == SHOCK or fam == Family.CONTACT:
                out.append(self.make_wave(gw.left, gw.right, fam, x_evt,
                                          t_evt, 0.0, sigma=gw.sigma))
                continue
            if gw.strength < 0.0 or gw.strength <= cfg.eps_r:
                out.append(self.make_wave(gw.left, gw.right, fam, x_evt,
                                          t_evt, self._capped_width(
                                              seq, gw, width, x_evt, t_evt)))
                continue
            # moderate rarefaction
            width = self._capped_width(seq, gw, width, x_evt, t_evt)
            if width > 0.0:
                out.extend(self._make_multirarefaction(gw, width, x_evt,
                                                       t_evt))
            else:
                out.extend(self._split_centered(gw, x_evt, t_evt))
        return out

    def _repair_neighbors(self, seq, out_families, x_evt, t_evt):
        """Shrink outer simple neighbors whose virtual edge spans the event
        point, whenever a wave of their family emerges from it."""
        for nb, side in ((self._insert_right, +1), (self._insert_left, -1)):
            if nb is None or not nb.kind.is_simple:
                continue
            if nb.family not in out_families:
                continue
            if self.reduce_overlap(seq, nb, x_evt, t_evt, side):
                self.schedule_wave(seq, nb)

    def _capped_width(self, seq, gw, width, x_evt, t_evt):
        """Cap an outgoing simple width so its virtual edges stay clear of
        the (already repaired) same-family outer neighbors."""
        if width <= 0.0:
            return 0.0
        sys = self.system
        fam = gw.family
        lam = lambda s: sys.lam(s, fam)
        speed = self._ls_speed(gw.left, gw.right)
        wdot = lam(gw.right) - lam(gw.left)
        for nb, side in ((self._insert_right, +1), (self._insert_left, -1)):
            if nb is None or nb.family != fam or not nb.kind.is_simple:
                continue
            le, re = nb.edges_at(t_evt, lam)
            if side > 0:
                width = self._cap_outgoing_width(
                    width, lam(gw.right), speed, wdot, x_evt, le, +1)
            else:
                width = self._cap_outgoing_width(
                    width, lam(gw.left), speed, wdot, x_evt, re, -1)
        return width

    def _split_centered(self, gw, x_evt, t_evt):
        """Split a zero-width moderate rarefaction as exactly centered."""
        pieces = split_rarefaction(gw.strength, self.cfg)
        chain = self._chain_states(gw, pieces)
        return [self.make_wave(l, r, gw.family, x_evt, t_evt, 0.0)
                for l, r in chain]

    def _chain_states(self, gw, pieces):
        """Adjacent exact state pairs partitioning a simple wave."""
        sys = self.system
        fam = gw.family
        pairs = []
        if fam == Family.FORWARD:
            ahead = gw.right
            for zeta in reversed(pieces):
                behind = self._w_map(ahead, zeta, fam)
                pairs.append((behind, ahead))
                ahead = behind
            pairs.reverse()
            pairs[0] = (gw.left, pairs[0][1])
        else:
            ahead = gw.left
            for zeta in pieces:
                behind = self._w_map(ahead, zeta, fam)
                pairs.append((ahead, behind))
                ahead = behind
            pairs[-1] = (pairs[-1][0], gw.right)
        return pairs

    def _w_map(self, ahead, zeta, fam):
        sys = self.system
        if hasattr(sys, "w_map"):
            return sys.w_map(ahead, zeta, fam)
        eos = sys._eos_at(ahead.s)
        p_b = eos.pressure_from_z(eos.riemann_coordinate(ahead.p) - zeta)
        return sys.simple_wave_to(ahead, p_b, fam)

    def _make_multirarefaction(self, gw, width, x_evt, t_evt):
        """Split a positive-width moderate rarefaction into a group whose
        members temporarily emanate from the event point and revert to
        their centered trajectories at the revert time."""
        sys, cfg = self.system, self.cfg
        fam = gw.family
        pieces = split_rarefaction(gw.strength, cfg)
        if len(pieces) == 1:
            return [self.make_wave(gw.left, gw.right, fam, x_evt, t_evt,
                                   width)]
        lam = lambda s: sys.lam(s, fam)
        wdot = lam(gw.right) - lam(gw.left)
        dt_back = width / wdot          # t_evt - t_center
        t_c = t_evt - dt_back
        u_bar = self._w_map(gw.right if fam == Family.FORWARD else gw.left,
                            gw.strength / 2.0, fam)
        x_c = x_evt - lam(u_bar) * dt_back
        m = len(pieces) // 2
        t_rev = t_evt + dt_back / (m * cfg.eps_r) * cfg.mr_horizon_const
        group = next(self._groups)
        ratio = dt_back / (t_rev - t_evt)
        waves = []
        for l, r in self._chain_states(gw, pieces):
            target = self._ls_speed(l, r)
            temp = target + (target - lam(u_bar)) * ratio
            w = self.make_wave(l, r, fam, x_evt, t_evt, 0.0, speed=temp)
            w.kind = WaveKind.RAREFACTION
            w.group_id = group
            w.target_speed = target
            w.revert_time = t_rev
            w.t_center = t_c
            # member width grows from the shared virtual center
            waves.append(w)
        ids = tuple(w.id for w in waves)
        self._pending_reverts.append((t_rev, x_c, ids))
        return waves

    # ------------------------------------------------------------------
    # event processing

    def _remove_incident(self, seq, incident):
        self._insert_left = seq.neighbor(incident[0], -1)
        self._insert_right = seq.neighbor(incident[-1], +1)
        for w in incident:
            self._account_remove(w)
            seq.remove(w.id)
            w.version += 1

    def _insert_new(self, seq, new_waves):
        after = self._insert_left.id if self._insert_left is not None else None
        for w in new_waves:
            seq.insert_after(w, after)
            after = w.id
            self._account_add(w)
        for w in new_waves:
            self.schedule_wave(seq, w)
        if not new_waves:
            # removal only: the outer neighbors become adjacent
            if self._insert_left is not None:
                self.schedule_wave(seq, self._insert_left)
            elif self._insert_right is not None:
                self.schedule_wave(seq, self._insert_right)

    def _process_interaction(self, seq, incident, t_evt, x_evt):
        w_L = incident[0].left
        w_R = incident[-1].right
        widths = self._incident_widths(incident, t_evt)
        waves, widths = self.enforce_compression_thresholds(w_L, w_R, widths)
        self._remove_incident(seq, incident)
        self._pending_reverts = []
        new_waves = self._materialize(seq, waves, widths, x_evt, t_evt)
        self._insert_new(seq, new_waves)
        for t_rev, x_c, ids in self._pending_reverts:
            vers = tuple(seq.get(i).version for i in ids)
            self._push(t_rev, x_evt, EventKind.REVERT, ids, vers)
        return new_waves

    def _process_revert(self, seq, item):
        out = []
        for wid, ver in zip(item.ids, item.versions):
            if wid not in seq:
                continue
            w = seq.get(wid)
            if w.version != ver or w.group_id is None:
                continue
            t_rev = w.revert_time
            x_now = w.position_at(t_rev)
            w.x_ref, w.t_ref = x_now, t_rev
            w.speed = w.target_speed
            w.group_id = None
            w.target_speed = None
            w.revert_time = None
            w.version += 1
            self._reaccount_speed(w)
            self.schedule_wave(seq, w)
            out.append(w)
        return out

    # ------------------------------------------------------------------
    # main loop

    def advance(self, seq, t_end=None, keep_snapshots=False,
                time_series_stride=1):
        """Process events in time order until t_end or the event budget.

        Returns a RunRecord; raises EventBudgetExceeded (with the record
        attached) when the budget is hit, and VacuumError on vacuum.
        """
        cfg = self.cfg
        sys = self.system
        if t_end is None:
            t_end = cfg.t_end
        record = RunRecord(config=cfg, system=sys, sequence=seq,
                           t_start=seq.t)
        record.drift_integral = np.zeros(sys.n)
        if keep_snapshots:
            record.snapshots = []

        # prime bookkeeping
        self._variation = 0.0
        self._res_norm = 0.0
        self._raw_res_norm = 0.0
        self._drift_rate = np.zeros(sys.n)
        for w in seq:
            self._account_add(w)
        record.initial_pieces = (
            seq.t, seq.leftmost_state,
            [(w.position_at(seq.t), w.right) for w in seq])
        record.time_series.append({
            "t": seq.t,
            "variation": self._variation,
            "residual_norm": self._res_norm,
            "raw_residual_norm": self._raw_res_norm,
            "wave_count": len(seq),
            "W_H": 0.0,
        })
        self._heap = []
        self.schedule_all(seq)
        if keep_snapshots:
            record.snapshots.append(self._snapshot(seq))

        gap_streak = 0
        last_t = seq.t
        accum_gap = 1e3 * max(self._time_tol, 1e-300)
        n_events = 0
        while self._heap:
            item = heapq.heappop(self._heap)
            if item.t > t_end:
                heapq.heappush(self._heap, item)
                break
            if self._stale(seq, item):
                continue
            if n_events >= cfg.max_events:
                record.t_final = seq.t
                raise EventBudgetExceeded(
                    f"event budget {cfg.max_events} exceeded", record)
            dt = item.t - seq.t
            if dt > 0.0:
                record.drift_integral += self._drift_rate * dt
                record.res_integral += self._res_norm * dt
                record.raw_res_integral += self._raw_res_norm * dt
            seq.t = item.t

            if item.kind == EventKind.REVERT:
                out = self._process_revert(seq, item)
                if not out:
                    continue
                in_info = ((), ())
                new_waves = out
                kind_label = "revert"
            else:
                if item.kind == EventKind.PAIR:
                    a, b = (seq.get(w) for w in item.ids)
                    hit = pair_interaction_point(a, b, seq.t - self._time_tol,
                                                 self._time_tol)
                    if hit is None or abs(hit[0] - item.t) > 10 * max(
                            self._time_tol, 1e-12 * abs(item.t)):
                        continue
                    incident = self._gather_incident(seq, a, b, item.t, item.x)
                    kind_label = "pair"
                else:
                    w = seq.get(item.ids[0])
                    incident = [w]
                    kind_label = "collapse"
                in_info = (tuple(w.id for w in incident),
                           tuple(w.strength for w in incident))
                try:
                    new_waves = self._process_interaction(
                        seq, incident, item.t, item.x)
                except VacuumError:
                    record.t_final = seq.t
                    record.aborted = "vacuum"
                    raise

            n_events += 1
            rec = EventRecord(
                index=n_events - 1, t=item.t, x=item.x, kind=kind_label,
                in_ids=in_info[0], in_strengths=in_info[1],
                out_ids=tuple(w.id for w in new_waves),
                out_families=tuple(int(w.family) for w in new_waves),
                out_strengths=tuple(w.strength for w in new_waves),
                out_speeds=tuple(w.speed for w in new_waves),
                out_widths=tuple(w.width_at(item.t) for w in new_waves),
                variation_after=self._variation,
                residual_norm_after=self._res_norm,
                raw_residual_norm_after=self._raw_res_norm,
                wave_count_after=len(seq))
            record.events.append(rec)
            if (n_events - 1) % time_series_stride == 0:
                record.time_series.append({
                    "t": item.t,
                    "variation": self._variation,
                    "residual_norm": self._res_norm,
                    "raw_residual_norm": self._raw_res_norm,
                    "wave_count": len(seq),
                    "W_H": 0.0,
                })
            if keep_snapshots:
                record.snapshots.append(self._snapshot(seq))

            # accumulation heuristic: many consecutive events with tiny gaps
            gap = item.t - last_t
            last_t = item.t
            if gap < accum_gap:
                gap_streak += 1
                if gap_streak >= 10_000:
                    record.accumulation_flag = True
            else:
                gap_streak = 0

        dt = t_end - seq.t
        if dt > 0.0:
            record.drift_integral += self._drift_rate * dt
            record.res_integral += self._res_norm * dt
            record.raw_res_integral += self._raw_res_norm * dt
            seq.t = t_end
        record.t_final = seq.t
        return record

    def _snapshot(self, seq):
        return (seq.t, seq.leftmost_state,
                [(w.x_ref, w.t_ref, w.speed, w.right) for w in seq])


# ---------------------------------------------------------------------------
# ray tracing diagnostics

def alpha_ray_probe(record, point, alphas, window=0.25):
    """Trace of the approximation along rays into a space-time point.

    For each slope alpha, samples the piecewise-constant state along
    x = x_* + alpha (t - t_*) at every recorded snapshot time, with the
    midpoint convention at jumps, and reports the oscillation of each state
    component over the final ``window`` fraction of the record.  Requires a
    run made with keep_snapshots=True.
    """
    if record.snapshots is None:
        raise ValueError("run was recorded without snapshots")
    x_star, t_star = point
    out = []
    for alpha in alphas:
        trace = []
        for t, u0, rows in record.snapshots:
            if t >= t_star:
                break
            x = x_star + alpha * (t - t_star)
            trace.append((t, _eval_snapshot(u0, rows, x, t)))
        if not trace:
            out.append({"alpha": alpha, "trace": [], "oscillation": 0.0})
            continue
        t0 = trace[0][0]
        t1 = trace[-1][0]
        cut = t1 - window * (t1 - t0)
        tail = [v for t, v in trace if t >= cut]
        arr = np.array([[v.p, v.u] for v in tail])
        osc = float(np.max(arr.max(axis=0) - arr.min(axis=0))) if len(arr) \
            else 0.0
        out.append({"alpha": alpha, "trace": trace, "oscillation": osc})
    return out


def _eval_snapshot(u0, rows, x, t):
    state = u0
    half = None
    for x_ref, t_ref, speed, right in rows:
        pos = x_ref + speed * (t - t_ref)
        if pos < x:
            state = right
        elif pos == x:
            half = (state, right)
            state = right
        else:
            break
    if half is not None:
        a, b = half
        s = None
        if a.has_entropy:
            s = 0.5 * (a.s + b.s)
        return State(0.5 * (a.p + b.p), 0.5 * (a.u + b.u), s)
    return state
