"""Command-line surface: configuration, runs and output artifacts.

Subcommands: ``run`` (simulate a scenario or config to t_end), ``riemann``
(solve one generalized Riemann problem and print its discretization),
``cycle`` (bifurcation analysis of the periodic cycle), ``rate``
(epsilon-sweep convergence harness) and ``plot`` (re-render a run
directory's front plot).  All outputs are deterministic functions of the
inputs; no randomness is used anywhere.

Artifacts: ``events.csv`` (one row per event, floats at 17 significant
digits), ``diagnostics.json`` (event count, time series, conservation
ledger, rate fit), ``frontplot.svg`` (wave trajectories colored by
family; dark hues compressive, light hues expansive) and
``profile_tNNN.csv`` (reconstruction samples).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:                     # python < 3.11
    import tomli as tomllib

import numpy as np

from .core import (
    EventBudgetExceeded,
    Family,
    NoConvergence,
    NotAdmissible,
    NotOnCurve,
    SchemeConfig,
    State,
    VacuumError,
)
from .diagnostics import conservation_ledger, rate_harness
from .engine import Engine
from .eos import GammaLawEOS
from .initrecon import InitialData, initialize, reconstruct
from .psystem import PSystem
from .scenarios import (
    NoBracketError,
    build_cycle,
    critical_strength,
    cyclic_initial_data,
    get_scenario,
    solve_leading,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VACUUM = 3
EXIT_BUDGET = 4
EXIT_INVARIANT = 5

EVENT_COLUMNS = [
    "event_index", "t", "x", "kind", "in_ids", "in_strengths", "out_ids",
    "out_families", "out_strengths", "out_speeds", "out_widths",
    "variation_after", "residual_norm_after",
]


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration

DEFAULT_CONFIG = {
    "eos": {"gamma": 1.4, "K": 1.0},
    "scheme": {"epsilon": 0.1, "e_r": 1.0, "e_c": 1.0, "e_w": 2.0,
               "e_p": 1.5, "e_d": 1.0, "e_i": 1.0, "kappa": 0.25},
    "domain": {"lo": -1.0, "hi": 1.0, "t_end": 0.5,
               "max_events": 1_000_000},
    "scenario": {"name": "sod_like", "samples": 400},
    "output": {"dir": ".", "profile_samples": 1000},
}


def parse_config(path):
    """Read a TOML config file into a section dict over the defaults."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = {sec: dict(vals) for sec, vals in DEFAULT_CONFIG.items()}
    for sec, vals in raw.items():
        if sec not in cfg:
            raise ConfigError(f"unknown config section [{sec}]")
        if not isinstance(vals, dict):
            raise ConfigError(f"section [{sec}] must hold key-value pairs")
        for key, val in vals.items():
            if key not in cfg[sec]:
                raise ConfigError(f"unknown key {key!r} in section [{sec}]")
            cfg[sec][key] = val
    return cfg


def emit_config(cfg):
    """Serialize a section dict to TOML text; parse(emit(c)) == c."""
    lines = []
    for sec, vals in cfg.items():
        lines.append(f"[{sec}]")
        for key, val in vals.items():
            if isinstance(val, bool):
                txt = "true" if val else "false"
            elif isinstance(val, (int, float)):
                txt = repr(val)
            else:
                txt = json.dumps(str(val))
            lines.append(f"{key} = {txt}")
        lines.append("")
    return "\n".join(lines)


def scheme_config_from(cfg, epsilon=None, t_end=None):
    eos = GammaLawEOS(gamma=float(cfg["eos"]["gamma"]),
                      K=float(cfg["eos"]["K"]))
    sch = cfg["scheme"]
    dom = cfg["domain"]
    try:
        return SchemeConfig(
            epsilon=float(epsilon if epsilon is not None
                          else sch["epsilon"]),
            e_r=float(sch["e_r"]), e_c=float(sch["e_c"]),
            e_w=float(sch["e_w"]), e_p=float(sch["e_p"]),
            e_d=float(sch["e_d"]), e_i=float(sch["e_i"]),
            kappa=float(sch["kappa"]), eos=eos,
            domain=(float(dom["lo"]), float(dom["hi"])),
            t_end=float(t_end if t_end is not None else dom["t_end"]),
            max_events=int(dom["max_events"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_initial_csv(path):
    """InitialData from a CSV of (x, p, u[, s]) sample rows."""
    rows = []
    with open(path) as fh:
        for line in fh:
            parts = [p.strip() for p in line.strip().split(",") if p.strip()]
            if not parts:
                continue
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                continue    # header line
            rows.append(vals)
    if len(rows) < 2:
        raise ConfigError(f"initial data {path}: need at least two samples")
    xs = [r[0] for r in rows]
    states = [State(r[1], r[2], r[3] if len(r) > 3 else None) for r in rows]
    return InitialData(xs, states)


# ---------------------------------------------------------------------------
# artifact writers

def _fmt(x):
    return format(float(x), ".17g")


def _fmt_list(vals):
    return ";".join(_fmt(v) for v in vals)


def _fmt_ints(vals):
    return ";".join(str(int(v)) for v in vals)


def write_events_csv(path, events):
    with open(path, "w") as fh:
        fh.write(",".join(EVENT_COLUMNS) + "\n")
        for ev in events:
            row = [str(ev.index), _fmt(ev.t), _fmt(ev.x), ev.kind,
                   _fmt_ints(ev.in_ids), _fmt_list(ev.in_strengths),
                   _fmt_ints(ev.out_ids), _fmt_ints(ev.out_families),
                   _fmt_list(ev.out_strengths), _fmt_list(ev.out_speeds),
                   _fmt_list(ev.out_widths), _fmt(ev.variation_after),
                   _fmt(ev.residual_norm_after)]
            fh.write(",".join(row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_diagnostics_json(path, record, rate_fit=None, initial_waves=None):
    ledger = None
    if record.initial_pieces is not None:
        led = conservation_ledger(record)
        ledger = {k: _jsonable(v) for k, v in led.items()}
    doc = {
        "event_count": record.event_count,
        "t_start": record.t_start,
        "t_final": record.t_final,
        "accumulation_flag": record.accumulation_flag,
        "aborted": record.aborted,
        "time_series": _jsonable(record.time_series),
        "ledger": ledger,
        "rate_fit": _jsonable(rate_fit) if rate_fit else None,
        "initial_waves": _jsonable(initial_waves) if initial_waves else [],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def write_profile_csv(path, seq, system, t, domain, n):
    prof = reconstruct(seq, system, t)
    xs = np.linspace(domain[0], domain[1], n)
    with_entropy = seq.leftmost_state.has_entropy
    with open(path, "w") as fh:
        fh.write("x,p,u,s\n" if with_entropy else "x,p,u\n")
        for x in xs:
            st = prof(x)
            row = [_fmt(x), _fmt(st.p), _fmt(st.u)]
            if with_entropy:
                row.append(_fmt(st.s))
            fh.write(",".join(row) + "\n")


# -- front plot -------------------------------------------------------------

# dark hues for compressive waves, light for expansive, by family
_COLORS = {
    (-1, True): "#1f3b8f", (-1, False): "#8fb6ff",
    (1, True): "#8f1f1f", (1, False): "#ff9f8f",
    (0, True): "#2f6f2f", (0, False): "#9fdf9f",
}


def wave_segments(initial_waves, events, t_final):
    """Trajectory segments from the event log.

    Each wave contributes one segment from its birth (initial placement
    or emergence at an event) to its death (absorption at an event) or
    to t_final.  Returns (x0, t0, x1, t1, family, compressive) tuples.
    """
    alive = {}
    for wid, fam, x, t, speed, strength in initial_waves:
        alive[wid] = (x, t, fam, strength < 0.0, speed)
    segments = []
    for ev in events:
        for wid in ev.in_ids:
            if wid in alive:
                x0, t0, fam, comp, speed = alive.pop(wid)
                segments.append((x0, t0, ev.x, ev.t, fam, comp))
        if ev.kind == "revert":
            # speed bookkeeping: close the old leg at the actual position
            for k, wid in enumerate(ev.out_ids):
                if wid in alive:
                    x0, t0, fam, comp, speed = alive.pop(wid)
                    x1 = x0 + speed * (ev.t - t0)
                    segments.append((x0, t0, x1, ev.t, fam, comp))
                    alive[wid] = (x1, ev.t, fam, comp, ev.out_speeds[k])
            continue
        for k, wid in enumerate(ev.out_ids):
            alive[wid] = (ev.x, ev.t, ev.out_families[k],
                          ev.out_strengths[k] < 0.0, ev.out_speeds[k])
    for x0, t0, fam, comp, speed in alive.values():
        segments.append((x0, t0, x0 + speed * (t_final - t0), t_final,
                         fam, comp))
    return segments


def write_frontplot_svg(path, segments, width=800, height=600):
    """Self-contained SVG: one polyline per wave trajectory segment."""
    if segments:
        xs = [s[0] for s in segments] + [s[2] for s in segments]
        ts = [s[1] for s in segments] + [s[3] for s in segments]
        x_lo, x_hi = min(xs), max(xs)
        t_lo, t_hi = min(ts), max(ts)
    else:
        x_lo, x_hi, t_lo, t_hi = 0.0, 1.0, 0.0, 1.0
    dx = (x_hi - x_lo) or 1.0
    dt = (t_hi - t_lo) or 1.0
    pad = 20.0

    def px(x):
        return pad + (x - x_lo) / dx * (width - 2 * pad)

    def py(t):
        return height - pad - (t - t_lo) / dt * (height - 2 * pad)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for x0, t0, x1, t1, fam, comp in segments:
        color = _COLORS[(int(fam), bool(comp))]
        lines.append(
            f'<polyline points="{px(x0):.2f},{py(t0):.2f} '
            f'{px(x1):.2f},{py(t1):.2f}" stroke="{color}" '
            f'stroke-width="1" fill="none"/>')
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# subcommands

def _initial_wave_table(seq, t):
    return [(w.id, int(w.family), w.position_at(t), t, w.speed, w.strength)
            for w in seq]


def _resolve_data(args, cfg):
    if args.scenario:
        sc = get_scenario(args.scenario)
        cfg["eos"] = {"gamma": sc.eos.gamma, "K": sc.eos.K}
        cfg["domain"]["lo"], cfg["domain"]["hi"] = sc.domain
        if args.t_end is None:
            cfg["domain"]["t_end"] = sc.t_end
        return sc.data(int(cfg["scenario"]["samples"]))
    if args.data:
        return load_initial_csv(args.data)
    sc = get_scenario(str(cfg["scenario"]["name"]))
    cfg["eos"] = {"gamma": sc.eos.gamma, "K": sc.eos.K}
    cfg["domain"]["lo"], cfg["domain"]["hi"] = sc.domain
    return sc.data(int(cfg["scenario"]["samples"]))


def cmd_run(args):
    cfg = parse_config(args.config) if args.config else \
        {s: dict(v) for s, v in DEFAULT_CONFIG.items()}
    data = _resolve_data(args, cfg)
    scfg = scheme_config_from(cfg, args.epsilon, args.t_end)
    out_dir = Path(args.out or cfg["output"]["dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    system = PSystem(scfg.eos)
    seq, eng = initialize(data, scfg, system=system)
    initial_waves = _initial_wave_table(seq, seq.t)
    status = EXIT_OK
    try:
        record = eng.advance(seq, t_end=scfg.t_end)
    except EventBudgetExceeded as exc:
        record, status = exc.record, EXIT_BUDGET
    except VacuumError:
        return EXIT_VACUUM

    write_events_csv(out_dir / "events.csv", record.events)
    write_diagnostics_json(out_dir / "diagnostics.json", record,
                           initial_waves=initial_waves)
    segments = wave_segments(initial_waves, record.events, record.t_final)
    write_frontplot_svg(out_dir / "frontplot.svg", segments)
    tag = f"{int(round(1000 * record.t_final)):03d}"
    write_profile_csv(out_dir / f"profile_t{tag}.csv", seq, system,
                      record.t_final, scfg.domain,
                      int(cfg["output"]["profile_samples"]))
    if args.frame == "eulerian-output":
        _write_eulerian_profile(out_dir / f"profile_t{tag}_eulerian.csv",
                                seq, system, record.t_final, scfg.domain,
                                int(cfg["output"]["profile_samples"]))
    print(f"events={record.event_count} t_final={_fmt(record.t_final)} "
          f"out={out_dir}")
    return status


def _write_eulerian_profile(path, seq, system, t, domain, n):
    """Profile with density and Eulerian sound speed columns."""
    prof = reconstruct(seq, system, t)
    eos = system.eos
    xs = np.linspace(domain[0], domain[1], n)
    with open(path, "w") as fh:
        fh.write("x,p,u,rho,a\n")
        for x in xs:
            st = prof(x)
            v = eos.specific_volume(st.p)
            fh.write(",".join([_fmt(x), _fmt(st.p), _fmt(st.u),
                               _fmt(1.0 / v),
                               _fmt(eos.eulerian_sound_speed(st.p))]) + "\n")


def _parse_state(text):
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad state {text!r}: {exc}") from exc
    if len(parts) == 2:
        return State(parts[0], parts[1])
    if len(parts) == 3:
        return State(parts[0], parts[1], parts[2])
    raise ConfigError(f"bad state {text!r}: need p,u or p,u,s")


def cmd_riemann(args):
    eos = GammaLawEOS(gamma=args.gamma, K=args.K)
    scfg = SchemeConfig(epsilon=args.epsilon or 0.1, eos=eos)
    sys_ = PSystem(eos)
    w_l, w_r = _parse_state(args.left), _parse_state(args.right)
    try:
        mid, back, fwd = sys_.solve_grp(w_l, w_r)
    except VacuumError as exc:
        print(f"vacuum: {exc}")
        return EXIT_VACUUM
    print(f"p_mid = {_fmt(mid.p)}")
    print(f"u_mid = {_fmt(mid.u)}")
    for name, w in (("backward", back), ("forward", fwd)):
        if w is None:
            print(f"{name}: none")
            continue
        from .discretize import jump_speed
        print(f"{name}: {w.branch} strength={_fmt(w.strength)} "
              f"speed={_fmt(jump_speed(sys_, w))}")
    from .discretize import build_dgrs
    jumps, _ = build_dgrs([w for w in (back, fwd) if w is not None],
                          sys_, scfg)
    print(f"dgrs_jumps = {len(jumps)}")
    for j in jumps:
        print(f"  {j.kind.value:12s} fam={int(j.family):+d} "
              f"strength={_fmt(j.strength)} speed={_fmt(j.speed)}")
    return EXIT_OK


def cmd_cycle(args):
    eos = GammaLawEOS(gamma=args.gamma, K=args.K)
    try:
        crit = critical_strength(args.z0, eos)
    except NoBracketError as exc:
        print(f"no-bracket: {exc}")
        return EXIT_OK
    print(f"zeta_critical = {_fmt(crit.zeta)}")
    print(f"combined_strength = {_fmt(crit.combined)}")
    print(f"combined_over_z0 = {_fmt(crit.combined / crit.z0)}")
    print(f"sign_changes = {crit.sign_changes}")
    zeta = crit.zeta + min(0.02 * args.z0, 0.5 * (args.z0 - crit.zeta))
    cyc = build_cycle(zeta, args.z0, eos)
    lead = solve_leading(cyc)
    print(f"beta = {_fmt(cyc.beta)} (at zeta = {_fmt(zeta)})")
    print(f"alpha = {_fmt(lead.alpha)}")
    print(f"z_L = {_fmt(eos.riemann_coordinate(lead.w_L.p))}")
    print(f"closure_defect = {_fmt(lead.closure_defect)}")
    return EXIT_OK


def cmd_rate(args):
    cfg = parse_config(args.config) if args.config else \
        {s: dict(v) for s, v in DEFAULT_CONFIG.items()}
    name = args.scenario or str(cfg["scenario"]["name"])
    sc = get_scenario(name)
    epsilons = [float(v) for v in args.epsilons.split(",")]

    def run_one(eps):
        scfg = sc.config(eps, t_end=args.t_end if args.t_end is not None
                         else sc.t_end)
        seq, eng = initialize(sc.data(int(cfg["scenario"]["samples"])),
                              scfg, system=PSystem(sc.eos))
        return eng.advance(seq, t_end=scfg.t_end)

    fit = rate_harness(run_one, epsilons)
    fit.pop("records", None)
    print(f"classification = {fit['classification']}")
    if fit["slope"] is not None:
        print(f"slope = {_fmt(fit['slope'])}")
    for eps, sup in zip(fit["epsilons"], fit["sups"]):
        print(f"eps={_fmt(eps)} sup_residual={_fmt(sup)}")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "rate.json", "w") as fh:
            json.dump(_jsonable(fit), fh, indent=1)
            fh.write("\n")
    return EXIT_OK


def cmd_plot(args):
    run_dir = Path(args.run_dir)
    events = read_events_csv(run_dir / "events.csv")
    with open(run_dir / "diagnostics.json") as fh:
        diag = json.load(fh)
    initial = [tuple(row) for row in diag.get("initial_waves", [])]
    segments = wave_segments(initial, events, diag["t_final"])
    out = Path(args.out or run_dir) / "frontplot.svg"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_frontplot_svg(out, segments)
    print(f"segments={len(segments)} out={out}")
    return EXIT_OK


class _EventRow:
    def __init__(self, row):
        self.index = int(row[0])
        self.t = float(row[1])
        self.x = float(row[2])
        self.kind = row[3]
        self.in_ids = _ints(row[4])
        self.in_strengths = _floats(row[5])
        self.out_ids = _ints(row[6])
        self.out_families = _ints(row[7])
        self.out_strengths = _floats(row[8])
        self.out_speeds = _floats(row[9])
        self.out_widths = _floats(row[10])
        self.variation_after = float(row[11])
        self.residual_norm_after = float(row[12])


def _ints(cell):
    return tuple(int(v) for v in cell.split(";")) if cell else ()


def _floats(cell):
    return tuple(float(v) for v in cell.split(";")) if cell else ()


def read_events_csv(path):
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != EVENT_COLUMNS:
            raise ConfigError(f"unexpected event log header in {path}")
        for line in fh:
            line = line.strip()
            if line:
                rows.append(_EventRow(line.split(",")))
    return rows


# ---------------------------------------------------------------------------
# argument parsing

def build_parser():
    parser = argparse.ArgumentParser(
        prog="fronttrack",
        description="event-driven front tracking for 1-D gas dynamics")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="TOML config file")
        p.add_argument("--scenario", default=None,
                       help="registry scenario name")
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--t-end", dest="t_end", type=float, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed-free", action="store_true",
                       help="assert determinism (no RNG is used anywhere)")
        p.add_argument("--frame", choices=["lagrangian", "eulerian-output"],
                       default="lagrangian")

    p_run = sub.add_parser("run", help="simulate to t_end")
    common(p_run)
    p_run.add_argument("--data", default=None,
                       help="initial data CSV (x,p,u[,s])")
    p_run.set_defaults(func=cmd_run)

    p_rp = sub.add_parser("riemann", help="solve one Riemann problem")
    common(p_rp)
    p_rp.add_argument("--left", required=True, help="left state p,u[,s]")
    p_rp.add_argument("--right", required=True, help="right state p,u[,s]")
    p_rp.add_argument("--gamma", type=float, default=1.4)
    p_rp.add_argument("--K", type=float, default=1.0)
    p_rp.set_defaults(func=cmd_riemann)

    p_cy = sub.add_parser("cycle", help="periodic-cycle bifurcation")
    common(p_cy)
    p_cy.add_argument("--gamma", type=float, default=1.4)
    p_cy.add_argument("--K", type=float, default=1.0)
    p_cy.add_argument("--z0", type=float, default=1.0)
    p_cy.set_defaults(func=cmd_cycle)

    p_rt = sub.add_parser("rate", help="epsilon-sweep residual rates")
    common(p_rt)
    p_rt.add_argument("--epsilons", default="0.2,0.1,0.05,0.025")
    p_rt.set_defaults(func=cmd_rate)

    p_pl = sub.add_parser("plot", help="render a run directory to SVG")
    common(p_pl)
    p_pl.add_argument("run_dir", help="directory holding events.csv and "
                      "diagnostics.json")
    p_pl.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VacuumError as exc:
        print(f"vacuum: {exc}", file=sys.stderr)
        return EXIT_VACUUM
    except EventBudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (AssertionError, NotOnCurve, NotAdmissible,
            NoConvergence) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
