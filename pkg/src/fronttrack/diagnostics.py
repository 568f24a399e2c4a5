"""Run diagnostics: residual measure, a-priori bound, ledger, rates.

The residual of a wave sequence is a finite sum of point masses, one per
tracked wave, each weighted by the preconditioned defect of the
Rankine-Hugoniot relation at the wave's approximate speed.  Exact shocks
and contacts contribute nothing; simple waves contribute at cubic order
in their strength.  The conservation ledger integrates the same defects
in time and checks them against the flux balance of the piecewise
constant approximation.
"""

from __future__ import annotations

import math

import numpy as np

from .core import PointMassMeasure, variation


# Empirical cubic-residual constant: sup |R*| / |strength|^3 over gamma-law
# states with gamma in [1.4, 2], pressures up to 1e2 and strengths up to
# 0.5 measures about 1.03; the default carries a factor-two margin.
DEFAULT_BOUND_CONSTANTS = {"K_s": 2.0, "K_p": 0.0, "K_hp": 0.0}


# ---------------------------------------------------------------------------
# residual measure

def residual_measure(seq, system, t=None, preconditioned=True):
    """Point-mass residual of the sequence at time t (default: seq.t).

    One atom per wave, located at the wave's trajectory position, with
    vector weight A (s [q] - [f]) where A is the wave's preconditioner
    (identity when ``preconditioned`` is false).
    """
    if t is None:
        t = seq.t
    atoms = []
    for w in seq:
        r = residual_vector(w, system, preconditioned)
        if np.any(r):
            atoms.append((w.position_at(t), r))
    return PointMassMeasure(atoms)


def residual_vector(wave, system, preconditioned=True):
    """Defect s [q] - [f] of one wave, optionally preconditioned."""
    from .discretize import _apply, wave_preconditioner
    r = wave.speed * (system.q(wave.right) - system.q(wave.left)) \
        - (system.f(wave.right) - system.f(wave.left))
    if preconditioned:
        r = _apply(wave_preconditioner(system, wave.left, wave.right), r)
    return r


def residual_norm(seq, system, preconditioned=True):
    """Total-mass norm: sum of Euclidean weights of the residual atoms."""
    return float(sum(
        np.linalg.norm(residual_vector(w, system, preconditioned))
        for w in seq))


# ---------------------------------------------------------------------------
# a-priori residual bound

def residual_bound_check(seq, cfg, system, constants=None,
                         heavy_passenger_weight=0.0):
    """Check the strength-budget bound on the residual norm.

    The bound is V (K_s eps^(2 e_s) + K_p Q) + K_hp W_H, where V is the
    total variation, Q the passenger budget and W_H the heavy-passenger
    weight; with composites disabled the last two terms vanish.  The
    constants are empirical (see DEFAULT_BOUND_CONSTANTS) and may be
    overridden per corpus.
    """
    c = dict(DEFAULT_BOUND_CONSTANTS)
    if constants:
        c.update(constants)
    lhs = residual_norm(seq, system)
    V = variation(seq)
    rhs = V * c["K_s"] * cfg.epsilon ** (2.0 * cfg.e_s)
    if cfg.composites_enabled:
        rhs += V * c["K_p"] * cfg.q_of_eps(cfg.epsilon)
        rhs += c["K_hp"] * heavy_passenger_weight
    return {"lhs": lhs, "rhs": rhs, "variation": V,
            "ok": lhs <= rhs + 1e-300}


# ---------------------------------------------------------------------------
# conservation ledger

def _piecewise_q_integral(system, leftmost, pieces, a, b):
    """Integral of q over [a, b] for a piecewise-constant profile.

    ``pieces`` is a list of (x, state_right_of_x) in increasing x; the
    leftmost state holds below the first breakpoint.
    """
    total = np.zeros(system.n)
    x_prev = a
    state = leftmost
    for x, right in pieces:
        xc = min(max(x, a), b)
        total += system.q(state) * (xc - x_prev)
        x_prev, state = xc, right
    total += system.q(state) * (b - x_prev)
    return total


def conservation_ledger(record, margin=1e-6):
    """Flux balance of a completed run against its integrated residual.

    Integrates q over a window containing every wave at both endpoint
    times, subtracts the exact boundary flux through the (constant) far
    fields, and compares the remaining drift with the time-integrated
    defect.  The drift must equal the integrated defect vector to
    quadrature accuracy, and its norm must not exceed the integrated
    unpreconditioned residual norm by more than the stated margin.
    """
    system = record.system
    seq = record.sequence
    t0, left0, pieces0 = record.initial_pieces
    t1 = record.t_final
    pieces1 = [(w.position_at(t1), w.right) for w in seq]
    xs = [x for x, _ in pieces0] + [x for x, _ in pieces1]
    if not xs:
        xs = [0.0]
    span = max(xs) - min(xs)
    pad = 0.1 * span + 1.0
    a, b = min(xs) - pad, max(xs) + pad
    q0 = _piecewise_q_integral(system, left0, pieces0, a, b)
    q1 = _piecewise_q_integral(system, seq.leftmost_state, pieces1, a, b)
    boundary = (system.f(left0) - system.f(seq.rightmost_state)) * (t1 - t0)
    drift = q1 - q0 - boundary
    drift_norm = float(np.linalg.norm(drift))
    bound = record.raw_res_integral
    scale = max(abs(q0).max(), abs(q1).max(), 1.0)
    # a breakpoint moving at speed s advances the integral at -s [q], so the
    # geometric drift is the negative of the engine's accumulated defect
    identity_gap = float(np.linalg.norm(drift + record.drift_integral))
    return {
        "q_initial": q0, "q_final": q1, "boundary_flux": boundary,
        "drift": drift, "drift_norm": drift_norm,
        "integrated_defect": record.drift_integral,
        "identity_gap": identity_gap,
        "bound": bound,
        "ok": (drift_norm <= bound * (1.0 + margin) + 1e-10 * scale
               and identity_gap <= 1e-9 * scale),
    }


# ---------------------------------------------------------------------------
# convergence-rate harness

def sup_residual(record, preconditioned=True):
    """Supremum in time of the residual norm over a run's time series."""
    key = "residual_norm" if preconditioned else "raw_residual_norm"
    vals = [row[key] for row in record.time_series]
    return max(vals) if vals else 0.0


def rate_harness(run_fn, eps_list, exact_floor=1e-13):
    """Fit the observed order of the sup-in-time residual norm in epsilon.

    ``run_fn(eps)`` must return a completed RunRecord.  Returns the fitted
    log-log slope; a corpus whose residuals all sit below ``exact_floor``
    is classified as exact (slope None).
    """
    eps_list = sorted(eps_list, reverse=True)
    sups, records = [], []
    for eps in eps_list:
        rec = run_fn(eps)
        records.append(rec)
        sups.append(sup_residual(rec))
    if max(sups) <= exact_floor:
        return {"epsilons": eps_list, "sups": sups, "slope": None,
                "classification": "exact"}
    slope = float(np.polyfit(np.log(eps_list), np.log(sups), 1)[0])
    return {"epsilons": eps_list, "sups": sups, "slope": slope,
            "classification": "algebraic", "records": records}
