"""Discretization layer: centering, least squares, splitting, dgRS.

System-generic pieces shared by the p-system and Euler instantiations:
virtual-center geometry of simple waves, preconditioned least-squares
speeds and residuals for arbitrary jumps, the symmetric rarefaction
splitter, and assembly of the discretized generalized Riemann solution
(all jumps emanating from one point with monotone speeds).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DegenerateWidth, Family, WaveKind, ZeroJump
from .psystem import GRPWave, PSystem, SHOCK, SIMPLE


# ---------------------------------------------------------------------------
# centering

@dataclass
class CenteredWaveSpec:
    """Geometry of a simple wave of width w: edges meet at the center."""

    left: object
    right: object
    family: Family
    width: float
    x_c: float
    t_c: float
    t_ref: float

    @property
    def is_compression(self):
        return self.t_c > self.t_ref

    @property
    def is_rarefaction(self):
        return self.t_c < self.t_ref


def center_wave(u_minus, u_plus, width, x_ref, t_ref, lam):
    """Center of the simple wave occupying [x_ref, x_ref + width] at t_ref.

    ``lam`` maps a state to its characteristic speed.  The edge lines
    x_-(t) = x_ref + lam(u_minus)(t - t_ref) and x_+(t) = x_ref + width +
    lam(u_plus)(t - t_ref) intersect at the center; the center scales
    linearly with the width.
    """
    lam_l, lam_r = lam(u_minus), lam(u_plus)
    if lam_l == lam_r:
        raise DegenerateWidth("equal edge speeds: zero-strength simple wave")
    dt = width / (lam_l - lam_r)
    t_c = t_ref + dt
    x_c = x_ref + lam_l * dt
    return CenteredWaveSpec(u_minus, u_plus, None, width, x_c, t_c, t_ref)


# ---------------------------------------------------------------------------
# least squares

def ls_speed_generic(q_jump, f_jump, preconditioner=None):
    """(s_*, R_*): speed minimizing |A([f] - s[q])| and the residual there.

    ``preconditioner`` may be None (identity), a weight vector (diagonal) or
    a matrix.
    """
    qh = _apply(preconditioner, np.asarray(q_jump, dtype=float))
    fh = _apply(preconditioner, np.asarray(f_jump, dtype=float))
    qq = float(qh @ qh)
    if qq == 0.0:
        if float(fh @ fh) == 0.0:
            return 0.0, fh
        raise ZeroJump("zero conserved jump with nonzero flux jump")
    s_star = float(qh @ fh) / qq
    return s_star, fh - s_star * qh


def residual_at(q_jump, f_jump, s, preconditioner=None):
    """Residual vector A([f] - s[q]) at an arbitrary speed s."""
    qh = _apply(preconditioner, np.asarray(q_jump, dtype=float))
    fh = _apply(preconditioner, np.asarray(f_jump, dtype=float))
    return fh - s * qh


def residual_norm_at(q_jump, f_jump, s, preconditioner=None):
    """|R(s)| = sqrt(|R_*|^2 + (s - s_*)^2 |q_hat|^2)."""
    qh = _apply(preconditioner, np.asarray(q_jump, dtype=float))
    s_star, r_star = ls_speed_generic(q_jump, f_jump, preconditioner)
    return math.sqrt(float(r_star @ r_star) + (s - s_star) ** 2 * float(qh @ qh))


def _apply(A, vec):
    if A is None:
        return vec
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        return A * vec
    return A @ vec


def wave_preconditioner(system, w_l, w_r):
    """Default preconditioner for a jump: diagonal acoustic rescaling for
    the p-system, the symmetric square root of Dq for the 3x3 system."""
    if isinstance(system, PSystem):
        return system.preconditioner(w_l.p, w_r.p)
    mid = type(w_l)(0.5 * (w_l.p + w_r.p), 0.5 * (w_l.u + w_r.u),
                    0.5 * (w_l.s + w_r.s))
    return system.preconditioner_sqrt_dq(mid)


# ---------------------------------------------------------------------------
# rarefaction splitting

def split_rarefaction(zeta, cfg):
    """Symmetric odd partition of a rarefaction strength.

    Strengths at or below eps^e_r stay whole.  Stronger rarefactions are
    split into 2m+1 pieces, each in [kappa eps^e_r, eps^e_r], middle pieces
    as large and outside pieces as small as the box allows.
    """
    if zeta <= 0.0:
        raise ValueError("split_rarefaction needs a positive strength")
    cap = cfg.eps_r
    if zeta <= cap:
        return [zeta]
    floor_ = cfg.kappa * cap
    n = math.ceil(zeta / cap - 1e-12)
    if n % 2 == 0:
        n += 1
    if n * floor_ > zeta:
        raise ValueError("infeasible split: kappa too large for this count")
    pieces = [floor_] * n
    rem = zeta - n * floor_
    m = n // 2
    room = cap - floor_
    take = min(room, rem)
    pieces[m] += take
    rem -= take
    for i in range(1, m + 1):
        if rem <= 0.0:
            break
        take = min(room, 0.5 * rem)
        pieces[m - i] += take
        pieces[m + i] += take
        rem -= 2 * take
    # symmetric rounding slack goes to the middle piece
    if rem > 0.0:
        pieces[m] = min(cap, pieces[m] + rem)
    total = sum(pieces)
    pieces[m] += zeta - total
    return pieces


# ---------------------------------------------------------------------------
# discretized generalized Riemann solution

@dataclass
class DGRSJump:
    """One jump of a dgRS: exact states, assigned speed, virtual width."""

    family: Family
    kind: WaveKind
    left: object
    right: object
    strength: float
    speed: float
    width: float = 0.0


def jump_speed(system, wave):
    """Assigned speed of a single gRP wave: exact sigma for shocks and
    contacts, preconditioned least-squares speed for simple waves."""
    if wave.branch == SHOCK:
        return wave.sigma
    if wave.family == Family.CONTACT:
        return 0.0
    A = wave_preconditioner(system, wave.left, wave.right)
    dq = system.q(wave.right) - system.q(wave.left)
    df = system.f(wave.right) - system.f(wave.left)
    s, _ = ls_speed_generic(dq, df, A)
    return s


def build_dgrs(grp_waves, system, cfg):
    """Jump list of the dgRS: rarefactions split, speeds monotone.

    ``grp_waves`` is the family-ordered list of GRPWave (Nones allowed).
    Returns (jumps, t_hash) where t_hash is the earliest compression
    collapse time relative to the solution instant (+inf if none).
    """
    jumps = []
    t_hash = math.inf
    for wave in grp_waves:
        if wave is None:
            continue
        if wave.branch == SHOCK or wave.family == Family.CONTACT:
            jumps.append(DGRSJump(wave.family, wave.kind, wave.left,
                                  wave.right, wave.strength,
                                  jump_speed(system, wave), 0.0))
            continue
        # simple branch
        lam_l = system.lam(wave.left, wave.family)
        lam_r = system.lam(wave.right, wave.family)
        if wave.strength < 0.0:
            # compression: single jump; collapse clock from its width
            if wave.width > 0.0 and lam_l > lam_r:
                t_hash = min(t_hash, wave.width / (lam_l - lam_r))
            jumps.append(DGRSJump(wave.family, WaveKind.COMPRESSION,
                                  wave.left, wave.right, wave.strength,
                                  jump_speed(system, wave), wave.width))
            continue
        pieces = split_rarefaction(wave.strength, cfg)
        if len(pieces) == 1:
            jumps.append(DGRSJump(wave.family, WaveKind.RAREFACTION,
                                  wave.left, wave.right, wave.strength,
                                  jump_speed(system, wave), wave.width))
            continue
        # chain exact states from the ahead side inward
        sub = _chain_rarefaction(system, wave, pieces)
        jumps.extend(sub)
    _assert_monotone(jumps)
    return jumps, t_hash


def _chain_rarefaction(system, wave, pieces):
    """Split a simple rarefaction into adjacent exact sub-waves."""
    fam = wave.family
    out = []
    if fam == Family.FORWARD:
        # ahead is the right state; build right-to-left
        ahead = wave.right
        for zeta in reversed(pieces):
            behind = system.w_map(ahead, zeta, fam) if hasattr(system, "w_map") \
                else system.simple_wave_to(
                    ahead, _p_at_strength(system, ahead, zeta), fam)
            gw = GRPWave(fam, SIMPLE, behind, ahead, zeta, None, 0.0)
            out.append(DGRSJump(fam, WaveKind.RAREFACTION, behind, ahead,
                                zeta, jump_speed(system, gw), 0.0))
            ahead = behind
        out.reverse()
        # reattach the exact behind state at the far end
        out[0].left = wave.left
    else:
        ahead = wave.left
        for zeta in pieces:
            behind = system.w_map(ahead, zeta, fam) if hasattr(system, "w_map") \
                else system.simple_wave_to(
                    ahead, _p_at_strength(system, ahead, zeta), fam)
            gw = GRPWave(fam, SIMPLE, ahead, behind, zeta, None, 0.0)
            out.append(DGRSJump(fam, WaveKind.RAREFACTION, ahead, behind,
                                zeta, jump_speed(system, gw), 0.0))
            ahead = behind
        out[-1].right = wave.right
    return out


def _p_at_strength(system, ahead, zeta):
    """Pressure reached from ``ahead`` by a simple wave of strength zeta."""
    eos = system._eos_at(ahead.s) if hasattr(system, "_eos_at") else system.eos
    z_a = eos.riemann_coordinate(ahead.p)
    return eos.pressure_from_z(z_a - zeta)


def _assert_monotone(jumps):
    for a, b in zip(jumps, jumps[1:]):
        if not a.speed < b.speed:
            raise AssertionError(
                f"dgRS speeds not increasing: {a.speed} >= {b.speed}")


def dgrs_residual_norm(jumps, system):
    """Sum of preconditioned per-jump residual norms of a dgRS."""
    total = 0.0
    for j in jumps:
        A = wave_preconditioner(system, j.left, j.right)
        dq = system.q(j.right) - system.q(j.left)
        df = system.f(j.right) - system.f(j.left)
        total += float(np.linalg.norm(residual_at(dq, df, j.speed, A)))
    return total
