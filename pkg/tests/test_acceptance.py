"""End-to-end acceptance gate.

Eleven independent checks, one per core guarantee of the solver, each
with its own tolerance and wall-clock budget.  Every check prints a
single PASS line with its timing; a failure raises inside the timed
block and reports a FAIL line instead.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from fronttrack.core import Family, State, VacuumError
from fronttrack.diagnostics import conservation_ledger, rate_harness
from fronttrack.eos import GammaLawEOS
from fronttrack.euler import EulerSystem
from fronttrack.initrecon import initialize, reconstruct
from fronttrack.psystem import SHOCK, SIMPLE, GRPWave, PSystem
from fronttrack.core import EventBudgetExceeded
from fronttrack.scenarios import (
    SCENARIOS,
    critical_strength,
    build_cycle,
    fv_self_convergence,
    get_scenario,
    reference_fv,
    run_scenario,
)

BACK, FWD = Family.BACKWARD, Family.FORWARD


@contextmanager
def criterion(number, summary, limit):
    start = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"FAIL criterion {number}: {summary}")
        raise
    elapsed = time.perf_counter() - start
    print(f"PASS criterion {number}: {summary} ({elapsed:.2f}s)")
    assert elapsed < limit, f"criterion {number} exceeded {limit}s budget"


def sorted_pair(w_a, w_b, direction):
    return (w_b, w_a) if direction == Family.FORWARD else (w_a, w_b)


def make_shock(sys, w_a, zeta, direction):
    w_b = sys.s_map(w_a, zeta, direction)
    w_l, w_r = sorted_pair(w_a, w_b, direction)
    _, sigma = sys.shock_to(w_a, w_b.p, direction)
    return GRPWave(direction, SHOCK, w_l, w_r, zeta, sigma, 0.0)


# ---------------------------------------------------------------------------

def test_01_shock_jump_conditions_exact():
    with criterion(1, "shock speeds satisfy the jump conditions to 1e-12",
                   limit=1.0):
        rng = np.random.default_rng(11)
        for gamma in (1.4, 2.0):
            eos = GammaLawEOS(gamma, 1.0)
            psys = PSystem(eos)
            esys = EulerSystem(eos)
            for _ in range(250):
                ahead = State(rng.uniform(0.05, 5.0), rng.normal())
                p_b = ahead.p * rng.uniform(1.01, 8.0)
                fam = FWD if rng.random() < 0.5 else BACK
                behind, sigma = psys.shock_to(ahead, p_b, fam)
                w_l, w_r = sorted_pair(ahead, behind, fam)
                df = psys.f(w_r) - psys.f(w_l)
                r = sigma * (psys.q(w_r) - psys.q(w_l)) - df
                assert np.linalg.norm(r) <= 1e-12 * np.linalg.norm(df)
            for _ in range(250):
                ahead = State(rng.uniform(0.05, 5.0), rng.normal(),
                              rng.normal() * 0.3)
                p_b = ahead.p * rng.uniform(1.01, 8.0)
                fam = FWD if rng.random() < 0.5 else BACK
                behind, sigma = esys.shock_curve_3(ahead, p_b, fam)
                w_l, w_r = sorted_pair(ahead, behind, fam)
                df = esys.f(w_r) - esys.f(w_l)
                r = sigma * (esys.q(w_r) - esys.q(w_l)) - df
                assert np.linalg.norm(r) <= 1e-12 * np.linalg.norm(df)


def test_02_simple_wave_residual_and_speed_orders():
    with criterion(2, "simple-wave residual is cubic and speed error "
                   "quadratic in the strength", limit=1.0):
        psys = PSystem(GammaLawEOS(1.4, 1.0))
        ahead = State(1.0, 0.0)
        zetas = np.geomspace(1e-4, 1e-1, 20)
        res, sp_err = [], []
        for z in zetas:
            behind = psys.w_map(ahead, z, FWD)
            s, R, _ = psys.ls_speed_residual(behind, ahead, FWD)
            mid = psys.w_map(ahead, z / 2.0, FWD)
            res.append(np.linalg.norm(R))
            sp_err.append(abs(s - psys.lam(mid, FWD)))
        r_slope = np.polyfit(np.log(zetas), np.log(res), 1)[0]
        s_slope = np.polyfit(np.log(zetas), np.log(sp_err), 1)[0]
        assert abs(r_slope - 3.0) <= 0.1
        assert abs(s_slope - 2.0) <= 0.1


def test_03_jensen_ratio_and_residual_splitting():
    with criterion(3, "Jensen ratio stays below one and the scalar "
                   "residual is split-superadditive", limit=1.0):
        rng = np.random.default_rng(13)
        for gamma in (1.4, 2.0):
            eos = GammaLawEOS(gamma, 1.0)
            psys = PSystem(eos)
            for _ in range(1000):
                p_l, p_r = rng.uniform(0.01, 20.0, size=2)
                if abs(p_l - p_r) < 1e-8:
                    continue
                _, _, beta = eos.averages(p_l, p_r)
                assert beta < 1.0
            for _ in range(1000):
                lo, hi = np.sort(rng.uniform(0.05, 10.0, size=2))
                if hi - lo < 1e-4:
                    continue
                mid = rng.uniform(lo, hi)
                whole = abs(psys.signed_scalar_residual(lo, hi))
                parts = (abs(psys.signed_scalar_residual(lo, mid))
                         + abs(psys.signed_scalar_residual(mid, hi)))
                assert parts < whole


def _pmid_bisection_oracle(eos, w_L, w_R):
    """Plain-bisection middle pressure, independent of the solver."""
    z = eos.riemann_coordinate

    def phi(p, p_s):
        if p <= p_s:
            return z(p) - z(p_s)
        v_s, v = eos.specific_volume(p_s), eos.specific_volume(p)
        return np.sqrt((p - p_s) * (v_s - v))

    def g(p):
        return (w_L.u - w_R.u) - phi(p, w_L.p) - phi(p, w_R.p)

    lo, hi = 1e-300, max(w_L.p, w_R.p)
    while g(hi) > 0.0:
        hi *= 2.0
    for _ in range(5000):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_04_riemann_middle_pressure_and_vacuum():
    with criterion(4, "Riemann middle pressure matches a bisection oracle "
                   "to 1e-10 and the vacuum threshold is exact", limit=2.0):
        rng = np.random.default_rng(17)
        for gamma in (1.4, 2.0):
            eos = GammaLawEOS(gamma, 1.0)
            psys = PSystem(eos)
            z = eos.riemann_coordinate
            for k in range(250):
                if k < 200:
                    w_L = State(rng.uniform(0.05, 5.0), rng.normal() * 1.5)
                    w_R = State(rng.uniform(0.05, 5.0), rng.normal() * 1.5)
                else:
                    # near-vacuum: velocity gap just below the threshold
                    w_L = State(rng.uniform(0.5, 2.0), 0.0)
                    p_r = rng.uniform(0.5, 2.0)
                    gap = (z(w_L.p) + z(p_r)) * (1 - 10 ** rng.uniform(-6, -2))
                    w_R = State(p_r, w_L.u + gap)
                if w_R.u - w_L.u >= z(w_L.p) + z(w_R.p):
                    continue
                mid, _, _ = psys.solve_grp(w_L, w_R)
                p_oracle = _pmid_bisection_oracle(eos, w_L, w_R)
                assert abs(mid.p - p_oracle) <= 1e-10 * max(1.0, p_oracle)
            # vacuum classification flips exactly at u_R - u_L = z_L + z_R
            w_L = State(1.0, 0.0)
            gap = 2.0 * z(1.0)
            with pytest.raises(VacuumError):
                psys.check_vacuum(w_L, State(1.0, w_L.u + gap))
            psys.check_vacuum(w_L, State(1.0, w_L.u + np.nextafter(gap, 0)))


def test_05_interaction_laws():
    with criterion(5, "crossing invariance, shock strengthening, linear "
                   "merging and reflected-wave signs", limit=2.0):
        rng = np.random.default_rng(19)
        for gamma in (1.4, 2.0):
            psys = PSystem(GammaLawEOS(gamma, 1.0))
            # crossing: opposite-family simple waves keep their strengths
            for _ in range(100):
                mid = State(rng.uniform(0.5, 2.0), rng.normal())
                zf = rng.uniform(-0.5, 0.5)
                zb = rng.uniform(-0.5, 0.5)
                w_L = psys.w_map(mid, zf, FWD)
                w_R = psys.w_map(mid, zb, BACK)
                fwd_in = GRPWave(FWD, SIMPLE, w_L, mid, zf, None, 0.01)
                back_in = GRPWave(BACK, SIMPLE, mid, w_R, zb, None, 0.02)
                _, back_out, fwd_out = psys.interact_pair(fwd_in, back_in)
                zb_out = 0.0 if back_out is None else back_out.strength
                zf_out = 0.0 if fwd_out is None else fwd_out.strength
                assert abs(zb_out - zb) <= 1e-12
                assert abs(zf_out - zf) <= 1e-12
            # opposite shocks strictly strengthen each other
            for _ in range(100):
                mid = State(rng.uniform(0.5, 2.0), rng.normal())
                zf = -rng.uniform(0.05, 0.8)
                zb = -rng.uniform(0.05, 0.8)
                fwd_in = make_shock(psys, mid, zf, FWD)
                back_in = make_shock(psys, mid, zb, BACK)
                _, back_out, fwd_out = psys.interact_pair(fwd_in, back_in)
                assert back_out.branch == SHOCK and fwd_out.branch == SHOCK
                assert back_out.strength < zb
                assert fwd_out.strength < zf
            # same-family merge is linear in the strengths
            for _ in range(100):
                top = State(rng.uniform(0.5, 2.0), rng.normal())
                z1 = -rng.uniform(0.05, 0.5)
                z2 = -rng.uniform(0.02, 0.3)
                sh = make_shock(psys, top, z1, BACK)
                behind = psys.w_map(sh.right, z2, BACK)
                comp = GRPWave(BACK, SIMPLE, sh.right, behind, z2, None, 0.05)
                _, back_out, fwd_out = psys.interact_pair(sh, comp)
                assert abs(back_out.strength - (z1 + z2)) <= 1e-12
                # reflected wave from a compressive merge is a rarefaction
                assert fwd_out is not None and fwd_out.strength > 0.0
            # merging with a rarefaction reflects a compression
            top = State(1.0, 0.0)
            sh = make_shock(psys, top, -0.5, BACK)
            rar_behind = psys.w_map(sh.right, 0.2, BACK)
            rar = GRPWave(BACK, SIMPLE, sh.right, rar_behind, 0.2, None, 0.05)
            _, back_out, fwd_out = psys.interact_pair(sh, rar)
            assert abs(back_out.strength - (-0.3)) <= 1e-12
            assert fwd_out is not None and fwd_out.strength < 0.0
            # a collapsing compression reflects an opposite rarefaction
            ahead = State(1.0, 0.0)
            behind = psys.w_map(ahead, -0.3, FWD)
            comp = GRPWave(FWD, SIMPLE, behind, ahead, -0.3, None, 0.0)
            _, back_out, fwd_out = psys.collapse_compression(comp)
            assert fwd_out.branch == SHOCK
            assert back_out is not None and back_out.strength > 0.0


def test_06_residual_convergence_rate():
    with criterion(6, "sup-in-time residual of the shock-tube run decays "
                   "at second order in the strength threshold", limit=30.0):
        fit = rate_harness(lambda eps: run_scenario("sod_like", eps),
                           [0.2, 0.1, 0.05, 0.025])
        assert fit["classification"] == "algebraic"
        assert abs(fit["slope"] - 2.0) <= 0.25


def test_07_conservation_ledger():
    with criterion(7, "conservation drift stays within the integrated "
                   "residual on every registry scenario", limit=30.0):
        for name in sorted(SCENARIOS):
            t_end = 0.004 if name.startswith("cycle") else None
            rec = run_scenario(name, 0.1, t_end=t_end)
            led = conservation_ledger(rec, margin=1e-6)
            scale = max(abs(led["q_initial"]).max(),
                        abs(led["q_final"]).max(), 1.0)
            assert led["drift_norm"] <= (led["bound"] * (1.0 + 1e-6)
                                         + 1e-10 * scale), name
            assert led["ok"], name


def test_08_frame_equivalence():
    with criterion(8, "mass-coordinate speeds map to the physical frame "
                   "consistently with the Eulerian jump conditions",
                   limit=1.0):
        rng = np.random.default_rng(23)
        esys = EulerSystem(GammaLawEOS(1.4, 1.0))
        for _ in range(200):
            w_a = State(rng.uniform(0.3, 3.0), rng.normal(),
                        rng.normal() * 0.3)
            p_b = w_a.p * rng.uniform(1.05, 4.0)
            for fam in (BACK, FWD):
                w_b, sigma = esys.shock_curve_3(w_a, p_b, fam)
                w_l, w_r = sorted_pair(w_a, w_b, fam)
                a_e = esys.to_eulerian_speed(w_l, w_r, sigma)
                # independent check: Eulerian mass jump condition
                rho_a, rho_b = esys.density(w_a), esys.density(w_b)
                s_e = ((rho_b * w_b.u - rho_a * w_a.u)
                       / (rho_b - rho_a))
                assert abs(a_e - s_e) <= 1e-10
            # characteristic speeds map to u -/+ a and the contact to u
            a_snd = esys.eulerian_sound_speed(w_a)
            for fam, expect in ((BACK, w_a.u - a_snd), (FWD, w_a.u + a_snd)):
                lam = esys.lam(w_a, fam)
                assert abs(esys.to_eulerian_speed(w_a, w_a, lam)
                           - expect) <= 1e-10
            w_c = esys.contact_to(w_a, w_a.s + 0.1)
            assert abs(esys.to_eulerian_speed(w_a, w_c, 0.0)
                       - w_a.u) <= 1e-10


def test_09_periodic_cycle_bifurcation():
    with criterion(9, "closed cycles need combined strength at least 3.5 "
                   "reference units, scale linearly, and open at cube-root "
                   "rate", limit=5.0):
        eos = GammaLawEOS(1.4, 1.0)
        base = critical_strength(1.0, eos)
        # each of the four cycle legs individually stays below the
        # reference strength; their combined strength crosses 3.5
        assert base.zeta < base.z0
        assert base.combined == 4.0 * base.zeta
        assert base.combined / base.z0 >= 3.5
        for a in (0.5, 2.0, 7.0):
            scaled = critical_strength(a, eos)
            assert abs(scaled.zeta - a * base.zeta) <= 1e-8 * a * base.zeta
        zetas = np.geomspace(1e-6, 1e-4, 6)
        betas = [build_cycle(z, 1.0, eos).beta for z in zetas]
        slope = np.polyfit(np.log(zetas), np.log(betas), 1)[0]
        assert abs(slope - 1.0 / 3.0) <= 0.03


def test_10_dense_cyclic_run():
    with criterion(10, "the cyclic run sustains 1e5 interactions with "
                   "clean event structure and spreading support",
                   limit=120.0):
        sc = get_scenario("cycle_gamma14")
        cfg = sc.config(0.05, max_events=100000)
        seq, eng = initialize(sc.data(), cfg, system=PSystem(sc.eos))
        try:
            rec = eng.advance(seq, t_end=10.0)
        except EventBudgetExceeded as exc:
            rec = exc.record
        assert rec.event_count >= 100000
        assert not rec.accumulation_flag
        events = rec.events
        # support spreads monotonically once shocks meet rarefactions
        mixed = next(i for i, ev in enumerate(events)
                     if ev.in_strengths and min(ev.in_strengths) < 0.0
                     and max(ev.in_strengths) > 0.0)
        xs = np.array([ev.x for ev in events[mixed:]])
        hull = np.maximum.accumulate(xs) - np.minimum.accumulate(xs)
        checkpoints = [hull[len(hull) * k // 4 - 1] for k in (1, 2, 3, 4)]
        assert all(b > a for a, b in zip(checkpoints, checkpoints[1:]))
        # post-transient interactions are binary or collapse-type
        tail = [ev for ev in events[len(events) // 2:]
                if ev.kind != "revert"]
        shapes = [(len(ev.in_ids), len(ev.out_ids)) for ev in tail]
        good = sum(1 for s in shapes if s in ((2, 2), (1, 2)))
        assert good >= 0.99 * len(shapes)


def test_11_finite_volume_cross_validation():
    with criterion(11, "profiles agree with an independent finite-volume "
                   "reference within its own discretization error",
                   limit=60.0):
        t_end = 0.2
        for name in ("two_shock", "single_rarefaction", "sod_like"):
            sc = get_scenario(name)
            rec = run_scenario(name, 0.025, t_end=t_end)
            prof = reconstruct(rec.sequence, PSystem(sc.eos), t_end)
            xc, p_ref, u_ref = reference_fv(sc.data(), sc.eos, 4000,
                                            t_end, sc.domain)
            p, u = prof.sample(xc)
            dx = xc[1] - xc[0]
            l1 = float(np.sum(np.abs(p - p_ref) + np.abs(u - u_ref)) * dx)
            self_err = fv_self_convergence(sc.data(), sc.eos, 4000,
                                           t_end, sc.domain)
            assert l1 <= 5.0 * self_err, name
