"""Event-driven front tracking for 1D hyperbolic conservation laws.

The scheme evolves a piecewise-constant approximation whose jumps carry
exact adjacent states, least-squares wavespeeds and virtual widths.  It is
instantiated for the isentropic p-system and the 3x3 Euler equations in
Lagrangian coordinates.
"""

from .core import (
    Family,
    WaveKind,
    State,
    Wave,
    WaveSequence,
    PointMassMeasure,
    SchemeConfig,
    VacuumError,
    NotAdmissible,
    NotOnCurve,
    NoConvergence,
    EventBudgetExceeded,
    DegenerateWidth,
    ZeroJump,
    position_at,
    variation,
)
from .eos import GammaLawEOS

__all__ = [
    "Family",
    "WaveKind",
    "State",
    "Wave",
    "WaveSequence",
    "PointMassMeasure",
    "SchemeConfig",
    "VacuumError",
    "NotAdmissible",
    "NotOnCurve",
    "NoConvergence",
    "EventBudgetExceeded",
    "DegenerateWidth",
    "ZeroJump",
    "position_at",
    "variation",
    "GammaLawEOS",
]

__version__ = "0.1.0"
