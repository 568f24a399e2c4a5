"""Scenario registry, periodic-cycle construction and FV reference."""

import numpy as np
import pytest

from fronttrack.core import Family, State
from fronttrack.eos import GammaLawEOS
from fronttrack.initrecon import initialize
from fronttrack.psystem import PSystem
from fronttrack.scenarios import (
    SCENARIOS,
    NoBracketError,
    build_cycle,
    critical_strength,
    cyclic_initial_data,
    fv_self_convergence,
    get_scenario,
    reference_fv,
    run_scenario,
    shock_mach_proxy,
    solve_leading,
)

BACK, FWD = Family.BACKWARD, Family.FORWARD
EOS14 = GammaLawEOS(gamma=1.4, K=1.0)
EOS2 = GammaLawEOS(gamma=2.0, K=1.0)

# frozen one-time measurements of the cycle bifurcation (unit reference
# strength); the bisection below reproduces them to its own tolerance
ZETA_CRIT_14 = 0.9418156246958345
ZETA_CRIT_2 = 0.9978760096719782
BETA_TABLE_14 = {0.001: 0.11496, 0.01: 0.26435, 0.05: 0.50243,
                 0.1: 0.68180, 0.5: 1.47513}
LEAD_ZL_14 = 0.2566474      # at zeta = critical + 0.02
LEAD_ALPHA_14 = 2.01817893


class TestCycleConstruction:
    def test_collinearity_of_forward_states(self):
        z = EOS14.riemann_coordinate
        for zeta in (0.05, 0.3, 0.7, 0.95):
            c = build_cycle(zeta, 1.0, EOS14)
            invs = [w.u - z(w.p) for w in (c.w1, c.w2, c.w5)]
            assert max(invs) - min(invs) <= 1e-12

    def test_chain_relations_exact(self):
        sys = PSystem(EOS14)
        c = build_cycle(0.6, 1.0, EOS14)
        pairs = [
            (sys.w_map(c.w0, c.zeta, BACK), c.w1),
            (sys.s_map(c.w1, -c.zeta, BACK), c.w4),
            (sys.s_map(c.w4, -c.beta, FWD), c.w2),
            (sys.w_map_T(c.w2, c.zeta, BACK), c.w3),
            (sys.s_map_T(c.w3, -c.zeta, BACK), c.w5),
        ]
        for a, b in pairs:
            assert a.p == pytest.approx(b.p, rel=1e-12)
            assert a.u == pytest.approx(b.u, abs=1e-12)

    def test_beta_table_frozen(self):
        for zeta, beta in BETA_TABLE_14.items():
            c = build_cycle(zeta, 1.0, EOS14)
            assert c.beta == pytest.approx(beta, rel=2e-4)

    def test_beta_cube_root_scaling(self):
        zs = np.geomspace(1e-6, 1e-4, 6)
        bs = [build_cycle(z, 1.0, EOS14).beta for z in zs]
        slope = np.polyfit(np.log(zs), np.log(bs), 1)[0]
        assert slope == pytest.approx(1.0 / 3.0, abs=0.03)

    def test_closure_flag_flips_at_critical(self):
        assert not build_cycle(ZETA_CRIT_14 - 0.01, 1.0, EOS14).closes
        assert build_cycle(ZETA_CRIT_14 + 0.01, 1.0, EOS14).closes


class TestCriticalStrength:
    def test_frozen_values(self):
        c14 = critical_strength(1.0, EOS14)
        assert c14.zeta == pytest.approx(ZETA_CRIT_14, rel=1e-9)
        assert c14.sign_changes == 1
        c2 = critical_strength(1.0, EOS2)
        assert c2.zeta == pytest.approx(ZETA_CRIT_2, rel=1e-9)
        assert c2.sign_changes == 1

    def test_combined_strength_counts_four_waves(self):
        c = critical_strength(1.0, EOS14)
        assert c.combined == pytest.approx(4.0 * c.zeta, rel=0, abs=0)
        assert c.combined / c.z0 >= 3.5

    def test_linear_scaling_in_reference_strength(self):
        base = critical_strength(1.0, EOS14)
        for a in (0.5, 2.0, 7.0):
            scaled = critical_strength(a, EOS14)
            assert scaled.zeta == pytest.approx(a * base.zeta, rel=1e-8)

    def test_no_bracket_reported(self):
        # a scan window away from the bifurcation has no sign change
        with pytest.raises(NoBracketError):
            critical_strength(1.0, EOS14, scan_window=(0.5, 0.9))


class TestLeadingShock:
    def test_frozen_solution(self):
        c = build_cycle(ZETA_CRIT_14 + 0.02, 1.0, EOS14)
        lead = solve_leading(c)
        assert EOS14.riemann_coordinate(lead.w_L.p) == pytest.approx(
            LEAD_ZL_14, rel=1e-6)
        assert lead.alpha == pytest.approx(LEAD_ALPHA_14, rel=1e-6)
        # over-determined fourth target is met automatically
        assert abs(lead.closure_defect) <= 1e-9

    def test_open_cycle_rejected(self):
        c = build_cycle(0.5, 1.0, EOS14)
        assert not c.closes
        with pytest.raises(NoBracketError):
            solve_leading(c)

    def test_shocks_are_strong(self):
        c = build_cycle(ZETA_CRIT_14 + 0.02, 1.0, EOS14)
        lead = solve_leading(c)
        sys = PSystem(EOS14)
        # persistent backward shock from w_L down to w_0
        _, sigma = sys.shock_to(lead.w_L, c.w0.p, BACK)
        assert shock_mach_proxy(sigma, lead.w_L.p, EOS14) >= 20.0
        # internal backward shock of the cycle
        _, sigma = sys.shock_to(c.w1, c.w4.p, BACK)
        assert shock_mach_proxy(sigma, c.w1.p, EOS14) >= 20.0


class TestCyclicInitialData:
    @pytest.mark.parametrize("eos", [EOS14, EOS2])
    def test_consecutive_pairs_on_curves(self, eos):
        data, cycle, lead = cyclic_initial_data(eos)
        sys = PSystem(eos)
        z = eos.riemann_coordinate
        states = data.states
        assert states[0] is lead.w_L
        # leading backward shock
        img = sys.s_map(lead.w_L, -(1.0 + lead.alpha) * cycle.zeta, BACK)
        assert img.p == pytest.approx(states[1].p, rel=1e-10)
        assert img.u == pytest.approx(states[1].u, abs=1e-9)
        scale = max(abs(s.u) + z(s.p) for s in states)
        for wl, wr in zip(states[1:], states[2:]):
            fwd_gap = (wr.u - z(wr.p)) - (wl.u - z(wl.p))
            back_gap = (wr.u + z(wr.p)) - (wl.u + z(wl.p))
            if min(abs(fwd_gap), abs(back_gap)) <= 1e-10 * scale:
                continue    # exact simple-wave pair
            # otherwise the pair must sit on a backward shock curve
            st = sys.wave_strength(wl, wr, BACK, "shock", tol=1e-10 * scale)
            assert st < 0.0

    def test_alternating_wave_pattern(self):
        data, cycle, lead = cyclic_initial_data(EOS14, n_periods=2)
        # period block: w1 | w5 | w3 | w2 | w1
        assert data.states[2] is cycle.w1
        assert data.states[3] is cycle.w5
        assert data.states[4] is cycle.w3
        assert data.states[5] is cycle.w2
        assert data.states[6] is cycle.w1

    def test_initializes_and_starts_interacting(self):
        sc = get_scenario("cycle_gamma14")
        cfg = sc.config(0.05, max_events=3000)
        seq, eng = initialize(sc.data(), cfg, system=PSystem(sc.eos))
        assert len(seq) > 100   # strong waves split into many pieces
        rec = eng.advance(seq, t_end=0.005)
        assert rec.event_count > 0
        assert not rec.accumulation_flag


class TestRegistry:
    def test_names(self):
        assert set(SCENARIOS) == {
            "sod_like", "two_shock", "single_rarefaction",
            "compressive_ramp", "cycle_gamma14", "cycle_gamma2"}

    def test_unknown_name_raises(self):
        with pytest.raises(KeyError):
            get_scenario("nope")

    def test_run_scenario_smoke(self):
        rec = run_scenario("sod_like", 0.1)
        assert rec.t_final == pytest.approx(0.3)


class TestReferenceFV:
    def test_constant_state_preserved(self):
        sc = get_scenario("sod_like")
        data = sc.data(50)
        const = type(data)(data.xs, [State(1.0, 0.0)] * len(data.xs))
        x, p, u = reference_fv(const, EOS14, 200, 0.1, (-1, 1))
        assert np.allclose(p, 1.0, atol=1e-13)
        assert np.allclose(u, 0.0, atol=1e-13)

    def test_single_shock_position(self):
        sys = PSystem(EOS14)
        ahead = State(1.0, 0.0)
        behind, sigma = sys.shock_to(ahead, 2.0, FWD)
        xs = np.linspace(-1, 1, 100)
        data = type(get_scenario("sod_like").data(4))(
            xs, [behind if x < 0 else ahead for x in xs])
        t = 0.25
        x, p, u = reference_fv(data, EOS14, 2000, t, (-1, 1))
        # transition midpoint sits on the exact shock trajectory
        pm = 0.5 * (behind.p + ahead.p)
        k = int(np.argmin(np.abs(p - pm)))
        assert x[k] == pytest.approx(sigma * t, abs=0.02)

    def test_self_convergence_shrinks(self):
        sc = get_scenario("sod_like")
        data = sc.data(200)
        e1 = fv_self_convergence(data, EOS14, 250, 0.2, (-1, 1))
        e2 = fv_self_convergence(data, EOS14, 1000, 0.2, (-1, 1))
        assert e2 < e1
