"""Incremental monotone stepper with validity-gated midpoint measurements.

Each step looks at the three candidates of the current cell (x-move B,
y-move C, diagonal D), measures the pairs {B, C}, {B, D}, {D, C} at their
midpoints M, H, V, keeps only measurements whose midpoint gradient is
conformal with the segment's direction, and resolves them with a fixed
priority table. When no usable measurement remains, a fallback driven by
the sign of ``A + B - 2 SxSy D`` picks between B and C.

Two execution paths exist:

* :func:`step` / :func:`run_traced` build full per-step records from the
  individual operations below;
* :func:`run_segment` uses the compiled walk loop when it is importable and
  the coefficients fit in int64, and the pure-Python twin otherwise.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction

from . import _purekernel
from .core import Conic, HalfPoint, boole, gradient, residue
from .errors import StepBudgetExceeded
from .segmentation import MonotonicSegment

try:  # compiled core is optional
    from . import _kernel
except ImportError:  # pragma: no cover - depends on build
    _kernel = None

if os.environ.get("CONICRASTER_PURE"):
    _kernel = None

EIGHT, FOUR = "eight", "four"
RULES = ("forced", "a", "b", "c", "d", "e", "f", "g", "h")
OOC = "ooc"
# pair members and the candidate chosen when b_F xor b_Lxy holds
PAIRS = {"M": ("B", "C"), "H": ("B", "D"), "V": ("D", "C")}
MOVES = {"B": (1, 0), "C": (0, 1), "D": (1, 1)}


def compiled_available() -> bool:
    return _kernel is not None


@dataclass
class StepState:
    p_a: HalfPoint
    x_m: int  # 2 X at the M midpoint
    y_m: int  # 2 Y at the M midpoint
    segment: MonotonicSegment
    step_count: int = 0

    @classmethod
    def start(cls, conic: Conic, seg: MonotonicSegment) -> "StepState":
        g = gradient(conic, seg.start + (seg.s_x, seg.s_y))
        return cls(seg.start, g.gx, g.gy, seg)


@dataclass(frozen=True)
class Measurement:
    kind: str
    midpoint: HalfPoint
    f_mid: int  # 4 F at the midpoint
    x_mid: int  # 2 X
    y_mid: int  # 2 Y
    valid: bool
    choice: str | None  # "B", "C" or "D"; None when invalid
    pick: str  # what the sign test says, valid or not
    f_first: int
    f_second: int
    lam4: int  # (P2 - P1).(G2 - G1), unit grid


@dataclass
class StepTrace:
    p_a: HalfPoint
    candidates: dict
    measurements: dict
    rule: str
    ooc_rule: bool
    move: tuple
    chosen: HalfPoint
    deciding: tuple = ()
    secondary: dict = field(default_factory=dict)
    third: dict = field(default_factory=dict)
    potential_ooa: bool = False


@dataclass
class Stats:
    steps: int = 0
    m_valid: int = 0
    h_valid: int = 0
    v_valid: int = 0
    ooc_rule: int = 0
    potential_ooa: int = 0
    forced: int = 0

    def __iadd__(self, other):
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))
        return self


@dataclass
class SegmentRun:
    points: list
    stats: Stats
    rules: list
    traces: list | None = None
    backend: str = "python"


# --- single-step operations ---------------------------------------------------

def candidates(state: StepState) -> tuple[HalfPoint, HalfPoint, HalfPoint]:
    sx, sy = state.segment.s_x, state.segment.s_y
    p = state.p_a
    return p + (2 * sx, 0), p + (0, 2 * sy), p + (2 * sx, 2 * sy)


def midpoints(p_a: HalfPoint, s_x: int, s_y: int) -> dict:
    return {"M": p_a + (s_x, s_y), "H": p_a + (2 * s_x, s_y), "V": p_a + (s_x, 2 * s_y)}


def primary_valid(x_mid: int, y_mid: int, seg: MonotonicSegment) -> bool:
    """Conformity of the midpoint's directed polar with the segment direction."""
    if x_mid == 0 or y_mid == 0:
        return False
    lxy = seg.b_lxy
    b1 = not (seg.b_y ^ (y_mid > 0) ^ lxy)
    b2 = seg.b_x ^ (x_mid > 0) ^ lxy
    return b1 and b2


def measure(conic: Conic, state: StepState, kind: str, two_point: bool = False) -> Measurement:
    seg = state.segment
    b, c, d = candidates(state)
    pts = {"B": b, "C": c, "D": d}
    first, second = PAIRS[kind]
    mid = midpoints(state.p_a, seg.s_x, seg.s_y)[kind]
    g = gradient(conic, mid)
    f = residue(conic, mid)
    p1, p2 = pts[first], pts[second]
    g1, g2 = gradient(conic, p1), gradient(conic, p2)
    lam4 = ((p2.u - p1.u) * (g2.gx - g1.gx) + (p2.v - p1.v) * (g2.gy - g1.gy)) // 4
    decide_on = f + lam4 if two_point else f
    pick = first if boole(decide_on) ^ seg.b_lxy else second
    valid = primary_valid(g.gx, g.gy, seg)
    return Measurement(kind, mid, f, g.gx, g.gy, valid, pick if valid else None, pick,
                       residue(conic, p1), residue(conic, p2), lam4)


def known_points_valid(conic: Conic, state: StepState, kind: str) -> bool:
    """Conformity at the midpoint and at both candidates of the pair.

    Stronger than :func:`primary_valid`; this is the premise under which the
    third condition follows.
    """
    seg = state.segment
    b, c, d = candidates(state)
    pts = {"B": b, "C": c, "D": d}
    mid = midpoints(state.p_a, seg.s_x, seg.s_y)[kind]
    for p in (mid,) + tuple(pts[k] for k in PAIRS[kind]):
        g = gradient(conic, p)
        if not primary_valid(g.gx, g.gy, seg):
            return False
    return True


def secondary_check(mmt: Measurement, seg: MonotonicSegment) -> bool:
    """Sign of the candidate residue difference against the segment constant."""
    return boole(mmt.f_second - mmt.f_first) == (not seg.b_lxy)


def third_check(mmt: Measurement, conic: Conic | None = None, seg: MonotonicSegment | None = None) -> bool:
    """``|4 lambda / (F2 - F1)| < 1``; a zero denominator counts as a failure."""
    diff = Fraction(mmt.f_second - mmt.f_first, 4)
    if diff == 0:
        return False
    return abs(mmt.lam4) < abs(diff)


def ooc_rule(state: StepState, conic: Conic, seg: MonotonicSegment | None = None) -> tuple[bool, bool]:
    """Fallback move (x-move, y-move) when no measurement may be used."""
    seg = seg or state.segment
    big = conic.a + conic.b - 2 * seg.s_x * seg.s_y * conic.d
    if big == 0:
        f_m = residue(conic, state.p_a + (seg.s_x, seg.s_y))
        b_lam = not boole(f_m)
    else:
        b_lam = big > 0
    b_xmove = not (b_lam ^ seg.b_lxy)
    return b_xmove, not b_xmove


def decide(mm: dict, mode: str = EIGHT) -> tuple[str, str, tuple]:
    """Priority table. Returns (rule, pick, deciding kinds); pick may be ``OOC``."""
    m = mm["M"]
    if mode == FOUR:
        return ("h", m.choice, ("M",)) if m.valid else ("a", OOC, ())
    h, v = mm["H"], mm["V"]
    if not (m.valid or h.valid or v.valid):
        return "a", OOC, ()
    if h.valid and v.valid:
        if h.choice == "B" and v.choice == "C":
            if m.valid:
                return "c", m.choice, ("M", "H", "V")
            return "b", OOC, ()
        if h.choice == "D" and v.choice == "D":
            return "d", "D", ("H", "V")
        if h.choice == "B":
            return "e", "B", ("H", "V")
        return "e", "C", ("H", "V")
    if h.valid or v.valid:
        one = h if h.valid else v
        if one.choice == "D":
            return "f", "D", (one.kind,)
        if m.valid:
            return "g", m.choice, (one.kind, "M")
        return "g", OOC, ()
    return "h", m.choice, ("M",)


def step(state: StepState, conic: Conic, seg: MonotonicSegment | None = None, mode: str = EIGHT,
         two_point: bool = False) -> tuple[HalfPoint, StepTrace]:
    """Advance ``state`` by one move and return the new point with its record."""
    seg = seg or state.segment
    b, c, d = candidates(state)
    cands = {"B": b, "C": c, "D": d}
    if state.p_a.u == seg.end.u or state.p_a.v == seg.end.v:
        move = (0, 1) if state.p_a.u == seg.end.u else (1, 0)
        trace = StepTrace(state.p_a, cands, {}, "forced", False, move, None)
    else:
        kinds = ("M", "H", "V") if mode == EIGHT else ("M",)
        mm = {k: measure(conic, state, k, two_point) for k in kinds}
        rule, pick, deciding = decide(mm, mode)
        used_ooc = pick == OOC
        if used_ooc:
            bx, by = ooc_rule(state, conic, seg)
            pick = "B" if bx else "C"
        big = conic.a + conic.b - 2 * seg.s_x * seg.s_y * conic.d
        f_m = mm["M"].f_mid
        trace = StepTrace(
            state.p_a, cands, mm, rule, used_ooc, MOVES[pick], None, deciding,
            secondary={k: secondary_check(x, seg) for k, x in mm.items()},
            third={k: third_check(x) for k, x in mm.items()},
            potential_ooa=boole(f_m) != boole(f_m + big),
        )
    mx, my = trace.move
    sx, sy = seg.s_x, seg.s_y
    state.p_a = state.p_a + (2 * sx * mx, 2 * sy * my)
    state.x_m += 2 * (mx * sx * conic.a + my * sy * conic.d)
    state.y_m += 2 * (mx * sx * conic.d + my * sy * conic.b)
    state.step_count += 1
    direct = gradient(conic, state.p_a + (sx, sy))
    if (state.x_m, state.y_m) != (direct.gx, direct.gy):
        raise RuntimeError(f"midpoint gradient drifted at {state.p_a}")
    trace.chosen = state.p_a
    return state.p_a, trace


def replay(trace: StepTrace, mode: str, conic: Conic, seg: MonotonicSegment) -> tuple:
    """Re-derive a recorded step's move from its recorded measurements."""
    if trace.rule == "forced":
        return trace.move
    rule, pick, _ = decide(trace.measurements, mode)
    if pick == OOC:
        state = StepState(trace.p_a, 0, 0, seg)
        bx, _ = ooc_rule(state, conic, seg)
        pick = "B" if bx else "C"
    return MOVES[pick]


def step_budget(seg: MonotonicSegment) -> int:
    return (abs(seg.end.u - seg.start.u) + abs(seg.end.v - seg.start.v)) // 2 + 4


def run_traced(conic: Conic, seg: MonotonicSegment, mode: str = EIGHT,
               two_point: bool = False) -> SegmentRun:
    state = StepState.start(conic, seg)
    points, traces, rules = [seg.start], [], []
    stats = Stats()
    budget = step_budget(seg)
    while state.p_a != seg.end:
        if state.step_count >= budget:
            raise StepBudgetExceeded(f"no end point after {state.step_count} steps")
        p, tr = step(state, conic, seg, mode, two_point)
        points.append(p)
        traces.append(tr)
        rules.append(tr.rule)
        stats.steps += 1
        if tr.rule == "forced":
            stats.forced += 1
            continue
        mm = tr.measurements
        stats.m_valid += mm["M"].valid
        if mode == EIGHT:
            stats.h_valid += mm["H"].valid
            stats.v_valid += mm["V"].valid
        stats.ooc_rule += tr.ooc_rule
        stats.potential_ooa += tr.potential_ooa
    return SegmentRun(points, stats, rules, traces, "traced")


def _fits_int64(conic: Conic, seg: MonotonicSegment) -> bool:
    span = max(abs(seg.start.u), abs(seg.start.v), abs(seg.end.u), abs(seg.end.v)) + 4
    a, b, d, i, j, m = (abs(c) for c in (conic.a, conic.b, conic.d, conic.i, conic.j, conic.m))
    bound = (a + b + 2 * d) * span * span + 4 * (i + j) * span + 4 * m + 2 * (a + b + 2 * d)
    return 8 * bound < 2**63


def run_segment(conic: Conic, seg: MonotonicSegment, mode: str = EIGHT, trace: bool = False,
                two_point: bool = False, backend: str | None = None) -> SegmentRun:
    """Digitize one segment from its start grid point to its end grid point.

    ``backend`` is ``"compiled"``, ``"python"`` or ``None`` (compiled when
    possible). Overflowing coefficients always run on Python integers.
    """
    if trace:
        return run_traced(conic, seg, mode, two_point)
    use = backend
    if use is None:
        use = "compiled" if _kernel is not None and _fits_int64(conic, seg) else "python"
    elif use == "compiled" and (_kernel is None or not _fits_int64(conic, seg)):
        use = "python"
    walk = _kernel.walk if use == "compiled" else _purekernel.walk
    us, vs, codes, st = walk(conic.a, conic.b, conic.d, conic.i, conic.j, conic.m,
                             seg.start.u, seg.start.v, seg.end.u, seg.end.v, seg.s_x, seg.s_y,
                             seg.b_lxy, mode == EIGHT, two_point, step_budget(seg))
    points = [HalfPoint(u, v) for u, v in zip(us, vs)]
    return SegmentRun(points, Stats(*st), [RULES[c] for c in codes], None, use)
