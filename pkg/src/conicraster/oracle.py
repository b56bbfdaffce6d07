"""Independent floating-point ground truth for the stepping engine.

Nothing here feeds back into the engine. Distances are Euclidean distances
to the *monotonic arc* of a segment (not the whole conic), found by dense
sampling of the arc parameter followed by bounded scalar refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import engine
from .core import Conic, HalfPoint, boole, gradient, inside, residue
from .curve import ConicCurve
from .errors import ClampedFootpoint, NoRealArc, PoleAtInfinity, SpanTooLarge
from .segmentation import MonotonicSegment

FOOTPOINT_SAMPLES = 10_001
DP_MAX_SPAN = 32


@lru_cache(maxsize=64)
def curve_of(conic: Conic) -> ConicCurve:
    return ConicCurve(conic)


@dataclass(frozen=True)
class Footpoint:
    q: tuple[float, float]
    rho: float
    grad_q: tuple[float, float]
    clamped: bool
    t: float


@dataclass(frozen=True)
class TheoremReport:
    p_e: tuple[float, float]
    eps_e: float
    tau_e: float
    tau_f: float  # tau_E * F_M, i.e. P_M . G_E + W_E
    f_m: float
    f_e: float
    lhs: float  # rho_2^2 - rho_1^2
    rhs: float
    valid: bool
    accurate: bool
    foot_first: Footpoint
    foot_second: Footpoint
    g_e: tuple[float, float]


def _as_xy(p):
    if isinstance(p, HalfPoint):
        return p.u / 2, p.v / 2
    return float(p[0]), float(p[1])


@lru_cache(maxsize=200_000)
def _footpoint(conic: Conic, x: float, y: float, seg: MonotonicSegment) -> Footpoint:
    curve = curve_of(conic)
    t0, t1 = seg.t_start, seg.t_end
    if t0 == t1:
        raise NoRealArc(f"segment {seg} has an empty parameter range")
    br = seg.branch_id
    ts = np.linspace(t0, t1, FOOTPOINT_SAMPLES)
    px, py = curve.point(br, ts)
    d2 = (px - x) ** 2 + (py - y) ** 2
    k = int(np.argmin(d2))
    t_best, v_best = float(ts[k]), float(d2[k])
    lo, hi = sorted((ts[max(k - 1, 0)], ts[min(k + 1, FOOTPOINT_SAMPLES - 1)]))

    def dist2(t):
        qx, qy = curve.point(br, t)
        return float((qx - x) ** 2 + (qy - y) ** 2)

    res = minimize_scalar(dist2, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    if res.fun < v_best:
        t_best, v_best = float(res.x), float(res.fun)

    # polish on the orthogonality condition, which is better conditioned
    # than the squared distance near its minimum
    def ortho(t):
        qx, qy = curve.point(br, t)
        tx, ty = curve.tangent(br, t)
        return float((qx - x) * tx + (qy - y) * ty)

    g_lo, g_hi = ortho(lo), ortho(hi)
    if lo < hi and g_lo * g_hi < 0:
        t_root = brentq(ortho, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        v_root = dist2(t_root)
        if v_root <= v_best * (1 + 1e-12) + 1e-300:
            t_best, v_best = float(t_root), v_root
    tol = 1e-9 * abs(t1 - t0)
    clamped = abs(t_best - t0) <= tol or abs(t_best - t1) <= tol
    qx, qy = (float(c) for c in curve.point(br, t_best))
    gx, gy = (float(c) for c in curve.grad(qx, qy))
    return Footpoint((qx, qy), math.sqrt(v_best), (gx, gy), clamped, t_best)


def footpoint(conic: Conic, p, seg: MonotonicSegment) -> Footpoint:
    """Nearest point of the segment's real arc to ``p``."""
    x, y = _as_xy(p)
    return _footpoint(conic, x, y, seg)


def path_cost(conic: Conic, seg: MonotonicSegment, path) -> float:
    """Sum of squared arc distances, accumulated in path order."""
    total = 0.0
    for p in path:
        total += footpoint(conic, p, seg).rho ** 2
    return total


def pole_of_line(conic: Conic, line) -> tuple[float, float]:
    """Pole of ``l1 x + l2 y + l3 = 0``."""
    q = np.array(conic.matrix(), dtype=float)
    l = np.array([float(c) for c in line])
    h = np.linalg.solve(q, l)
    scale = max(abs(h[0]), abs(h[1]), 1.0)
    if abs(h[2]) <= 1e-12 * scale:
        raise PoleAtInfinity(f"line {tuple(line)} passes through the center")
    return float(h[0] / h[2]), float(h[1] / h[2])


def _grad_w(conic: Conic, x, y):
    return (conic.a * x + conic.d * y + conic.i,
            conic.d * x + conic.b * y + conic.j,
            conic.i * x + conic.j * y + conic.m)


def construct_pole_e(conic: Conic, p_b, p_c, seg: MonotonicSegment) -> TheoremReport:
    """Pole E for the pair (p_b, p_c) and both sides of the distance theorem.

    E is the pole of the line through the footpoint midpoint whose normal is
    the offset from that midpoint to the candidate midpoint. Its polar then
    passes through the footpoint midpoint and the components of both
    footpoint offsets along the polar are equal and opposite.
    """
    fb, fc = footpoint(conic, p_b, seg), footpoint(conic, p_c, seg)
    if fb.clamped or fc.clamped:
        raise ClampedFootpoint("a footpoint lies on a segment end")
    bx, by = _as_xy(p_b)
    cx, cy = _as_xy(p_c)
    mx, my = (bx + cx) / 2, (by + cy) / 2
    fmx, fmy = (fb.q[0] + fc.q[0]) / 2, (fb.q[1] + fc.q[1]) / 2
    dx, dy = mx - fmx, my - fmy
    if dx == 0 and dy == 0:
        raise PoleAtInfinity("candidate midpoint coincides with the footpoint midpoint")
    ex, ey = pole_of_line(conic, (dx, dy, -(dx * fmx + dy * fmy)))
    gex, gey, wex = _grad_w(conic, ex, ey)
    gmx, gmy, wm = _grad_w(conic, mx, my)
    g2 = gex * gex + gey * gey
    pair_dot = (cx - bx) * gex + (cy - by) * gey
    foot_dot = (fc.q[0] - fb.q[0]) * gex + (fc.q[1] - fb.q[1]) * gey
    eps = foot_dot / pair_dot if pair_dot != 0 else math.inf
    f_m = mx * gmx + my * gmy + wm
    tau_f = ex * gmx + ey * gmy + wm
    tau = tau_f / f_m if f_m != 0 else math.nan
    f_e = ex * gex + ey * gey + wex
    lhs = fc.rho ** 2 - fb.rho ** 2
    rhs = 2.0 / g2 * (1.0 - eps) * tau_f * pair_dot
    mid = HalfPoint((_half(bx) + _half(cx)) // 2, (_half(by) + _half(cy)) // 2) \
        if isinstance(p_b, HalfPoint) and isinstance(p_c, HalfPoint) else None
    valid = False
    if mid is not None:
        g = gradient(conic, mid)
        valid = engine.primary_valid(g.gx, g.gy, seg)
    return TheoremReport((ex, ey), eps, tau, tau_f, f_m, f_e, lhs, rhs, valid, tau > 0,
                         fb, fc, (gex, gey))


def _half(c: float) -> int:
    return int(round(2 * c))


def tau(conic: Conic, p_e, p_m) -> float:
    """``(P_E . G_M + W_M) / F_M``; equals 1 when E is the midpoint itself."""
    ex, ey = _as_xy(p_e)
    mx, my = _as_xy(p_m)
    gx, gy, w = _grad_w(conic, mx, my)
    f_m = mx * gx + my * gy + w
    return (ex * gx + ey * gy + w) / f_m


def classify_ooa(conic: Conic, m: HalfPoint, p_b, p_c, seg: MonotonicSegment) -> str:
    """``"ooa"`` if ``m`` lies inside the conic on the pole side of the chord.

    The chord is the polar of E, which passes through the footpoint midpoint;
    ``"boundary"`` means ``m`` sits on it.
    """
    fb, fc = footpoint(conic, p_b, seg), footpoint(conic, p_c, seg)
    mx, my = _as_xy(m)
    off = math.hypot(mx - (fb.q[0] + fc.q[0]) / 2, my - (fb.q[1] + fc.q[1]) / 2)
    if not (fb.clamped or fc.clamped) and off <= 1e-12 * (1.0 + math.hypot(mx, my)):
        return "boundary"
    rep = construct_pole_e(conic, p_b, p_c, seg)
    scale = math.hypot(*rep.g_e) * (1.0 + math.hypot(*_as_xy(m)))
    if abs(rep.tau_f) <= 1e-12 * scale:
        return "boundary"
    if abs(rep.f_e) <= 1e-9 * math.hypot(*rep.g_e) * (1.0 + math.hypot(*rep.p_e)):
        # E on the curve: the chord is the tangent and the segment is empty
        return "accurate"
    same_side = (rep.tau_f > 0) == (rep.f_e > 0)
    if inside(conic, m) and same_side:
        return "ooa"
    return "accurate"


def chord_control_factor(conic: Conic, rep: TheoremReport) -> float:
    """Control factor of the chord cut from the conic by the polar of E.

    For two curve points the mean of their residues is zero, so the factor
    equals minus the residue at their midpoint.
    """
    ex, ey = rep.p_e
    gx, gy, w = _grad_w(conic, ex, ey)
    ends = _line_hits(conic, gx, gy, w)
    if len(ends) != 2:
        raise PoleAtInfinity("polar of E does not cut the conic")
    (x1, y1), (x2, y2) = ends
    g1, g2 = _grad_w(conic, x1, y1), _grad_w(conic, x2, y2)
    return ((x2 - x1) * (g2[0] - g1[0]) + (y2 - y1) * (g2[1] - g1[1])) / 4


def _line_hits(conic, la, lb, lc):
    n2 = la * la + lb * lb
    p0 = (-lc * la / n2, -lc * lb / n2)
    dv = (-lb / math.sqrt(n2), la / math.sqrt(n2))
    q2 = conic.a * dv[0] ** 2 + conic.b * dv[1] ** 2 + 2 * conic.d * dv[0] * dv[1]
    gx, gy, w = _grad_w(conic, *p0)
    q1 = dv[0] * gx + dv[1] * gy
    q0 = p0[0] * gx + p0[1] * gy + w
    disc = q1 * q1 - q2 * q0
    if q2 == 0 or disc < 0:
        return []
    r = math.sqrt(disc)
    return [(p0[0] + s * dv[0], p0[1] + s * dv[1]) for s in ((-q1 - r) / q2, (-q1 + r) / q2)]


def dp_digitize(conic: Conic, seg: MonotonicSegment, mode: str = engine.EIGHT):
    """Minimum-cost monotone lattice path from ``seg.start`` to ``seg.end``.

    Cost is the sum of squared arc distances of the visited points. Equal
    costs prefer the diagonal move, then the x-move.
    """
    nx, ny = seg.span
    if nx > DP_MAX_SPAN or ny > DP_MAX_SPAN:
        raise SpanTooLarge(f"span {seg.span} exceeds {DP_MAX_SPAN}")
    x0, y0 = seg.start.grid_xy()
    sx, sy = seg.s_x, seg.s_y
    rho2 = [[footpoint(conic, HalfPoint.grid(x0 + sx * a, y0 + sy * b), seg).rho ** 2
             for b in range(ny + 1)] for a in range(nx + 1)]
    moves = [(1, 1), (1, 0), (0, 1)] if mode == engine.EIGHT else [(1, 0), (0, 1)]
    best = [[math.inf] * (ny + 1) for _ in range(nx + 1)]
    nxt = [[None] * (ny + 1) for _ in range(nx + 1)]
    best[nx][ny] = rho2[nx][ny]
    for a in range(nx, -1, -1):
        for b in range(ny, -1, -1):
            if a == nx and b == ny:
                continue
            for da, db in moves:
                if a + da <= nx and b + db <= ny:
                    c = rho2[a][b] + best[a + da][b + db]
                    if c < best[a][b]:
                        best[a][b], nxt[a][b] = c, (da, db)
    path, a, b = [], 0, 0
    while True:
        path.append(HalfPoint.grid(x0 + sx * a, y0 + sy * b))
        if (a, b) == (nx, ny):
            break
        da, db = nxt[a][b]
        a, b = a + da, b + db
    return path_cost(conic, seg, path), path


@dataclass
class TwoPointReport:
    midpoint_cost: float
    two_point_cost: float
    disagreements: int
    steps: int
    midpoint_path: list
    two_point_path: list


def two_point_compare(conic: Conic, seg: MonotonicSegment, mode: str = engine.EIGHT) -> TwoPointReport:
    """Midpoint sign test against the mean-of-residues test on one segment.

    ``disagreements`` counts steps of the midpoint run where the other
    criterion, placed in the same state, would have moved differently.
    """
    mid = engine.run_traced(conic, seg, mode)
    two = engine.run_traced(conic, seg, mode, two_point=True)
    disagree = 0
    for tr in mid.traces:
        if tr.rule == "forced":
            continue
        state = engine.StepState(tr.p_a, 0, 0, seg)
        g = gradient(conic, tr.p_a + (seg.s_x, seg.s_y))
        state.x_m, state.y_m = g.gx, g.gy
        _, alt = engine.step(state, conic, seg, mode, two_point=True)
        disagree += alt.move != tr.move
    return TwoPointReport(path_cost(conic, seg, mid.points), path_cost(conic, seg, two.points),
                          disagree, mid.stats.steps, mid.points, two.points)


def marching_step(conic: Conic, seg: MonotonicSegment, p: HalfPoint, mode: str = engine.EIGHT) -> HalfPoint:
    """Baseline move: the candidate with the smallest arc distance."""
    sx, sy = seg.s_x, seg.s_y
    if p.u == seg.end.u:
        return p + (0, 2 * sy)
    if p.v == seg.end.v:
        return p + (2 * sx, 0)
    cands = [p + (2 * sx, 0), p + (0, 2 * sy)]
    if mode == engine.EIGHT:
        cands.append(p + (2 * sx, 2 * sy))
    return min(cands, key=lambda c: _fresh_rho(conic, c, seg))


def _fresh_rho(conic, p, seg):
    # uncached, so benchmarks time the real work
    return _footpoint.__wrapped__(conic, p.u / 2, p.v / 2, seg).rho


def oracle_march(conic: Conic, seg: MonotonicSegment, mode: str = engine.EIGHT) -> list:
    p, out = seg.start, [seg.start]
    while p != seg.end:
        p = marching_step(conic, seg, p, mode)
        out.append(p)
    return out


def decision_agreement(conic: Conic, seg: MonotonicSegment, traces) -> list:
    """Per deciding measurement: (kind, class, chosen, argmin, agrees).

    Only measurements that are valid, took part in the decision and whose
    footpoints are both interior are reported.
    """
    rows = []
    for tr in traces:
        if tr.rule == "forced" or tr.ooc_rule:
            continue
        for kind in tr.deciding:
            mmt = tr.measurements[kind]
            first, second = engine.PAIRS[kind]
            p1, p2 = tr.candidates[first], tr.candidates[second]
            try:
                cls = classify_ooa(conic, mmt.midpoint, p1, p2, seg)
            except (ClampedFootpoint, PoleAtInfinity):
                continue
            r1, r2 = footpoint(conic, p1, seg).rho, footpoint(conic, p2, seg).rho
            if abs(r1 - r2) <= 1e-12:
                best = mmt.choice
            else:
                best = first if r1 < r2 else second
            rows.append((kind, cls, mmt.choice, best, best == mmt.choice))
    return rows


__all__ = [
    "Footpoint", "TheoremReport", "footpoint", "path_cost", "pole_of_line", "construct_pole_e",
    "classify_ooa", "tau", "chord_control_factor", "dp_digitize", "two_point_compare",
    "oracle_march", "decision_agreement", "residue", "boole",
]
