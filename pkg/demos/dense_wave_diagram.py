#!/usr/bin/env python
"""
Wave diagram of a dense interaction run
=======================================

Advances the gamma = 1.4 cyclic scenario until a few thousand pairwise
interactions have fired and draws every tracked front as a trajectory
segment in the (x, t) plane: shocks dark, rarefaction pieces light,
backward family blue, forward family red.

Usage:  python demos/dense_wave_diagram.py [output.png]
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.collections import LineCollection

from fronttrack.cli import _COLORS, _initial_wave_table, wave_segments
from fronttrack.core import EventBudgetExceeded
from fronttrack.initrecon import initialize
from fronttrack.psystem import PSystem
from fronttrack.scenarios import get_scenario

MAX_EVENTS = 4000


def main(out="dense_wave_diagram.png"):
    sc = get_scenario("cycle_gamma14")
    cfg = sc.config(0.05, max_events=MAX_EVENTS)
    seq, eng = initialize(sc.data(), cfg, system=PSystem(sc.eos))
    initial = _initial_wave_table(seq, seq.t)
    print(f"{len(seq)} fronts after initialization")

    try:
        rec = eng.advance(seq, t_end=10.0)
    except EventBudgetExceeded as exc:
        rec = exc.record
    print(f"{rec.event_count} interactions up to t = {rec.t_final:.5f}")

    segs = wave_segments(initial, rec.events, rec.t_final)
    lines = [[(x0, t0), (x1, t1)] for x0, t0, x1, t1, _, _ in segs]
    colors = [_COLORS[(fam, comp)] for *_, fam, comp in segs]

    fig, ax = plt.subplots(figsize=(7, 6))
    ax.add_collection(LineCollection(lines, colors=colors, lw=0.5))
    ax.autoscale()
    ax.set_xlabel("x (mass coordinate)")
    ax.set_ylabel("t")
    ax.set_title(f"{len(lines)} front segments, "
                 f"{rec.event_count} interactions")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main(*sys.argv[1:])
