"""Split a clipped conic into monotonic arcs with grid-point end points."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import Conic, HalfPoint, b_left as compute_b_left
from .curve import ConicCurve
from .errors import EmptyAfterClipping, NoRealLocus

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class Frame:
    xmin: Fraction
    ymin: Fraction
    xmax: Fraction
    ymax: Fraction

    def __post_init__(self):
        for name in ("xmin", "ymin", "xmax", "ymax"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"empty frame {self}")

    def scaled(self, delta) -> "Frame":
        """The same frame in grid units for grid spacing ``delta``."""
        delta = Fraction(delta)
        return Frame(self.xmin / delta, self.ymin / delta, self.xmax / delta, self.ymax / delta)

    def contains(self, x, y, strict=True) -> bool:
        x0, y0, x1, y1 = (float(c) for c in (self.xmin, self.ymin, self.xmax, self.ymax))
        if strict:
            return x0 < x < x1 and y0 < y < y1
        return x0 <= x <= x1 and y0 <= y <= y1

    def grid_bounds(self) -> tuple[int, int, int, int]:
        """Smallest integer box holding every point snapped from inside the frame."""
        return (math.floor(self.xmin), math.floor(self.ymin),
                math.ceil(self.xmax), math.ceil(self.ymax))


@dataclass(frozen=True)
class MonotonicSegment:
    start: HalfPoint
    end: HalfPoint
    start_real: tuple[float, float]
    end_real: tuple[float, float]
    s_x: int
    s_y: int
    b_left: bool
    b_ccw: bool
    branch_id: int = 0
    t_start: float = 0.0
    t_end: float = 0.0

    @property
    def b_x(self) -> bool:
        return self.s_x > 0

    @property
    def b_y(self) -> bool:
        return self.s_y > 0

    @property
    def b_lxy(self) -> bool:
        return self.b_x ^ self.b_y ^ self.b_left

    @property
    def span(self) -> tuple[int, int]:
        return abs(self.end.u - self.start.u) // 2, abs(self.end.v - self.start.v) // 2


@dataclass
class Segmentation:
    """Result of :func:`segment_conic`; ``dropped`` holds filtered arcs."""

    segments: list
    dropped: list = field(default_factory=list)
    curve: ConicCurve | None = None


# --- breakpoints -----------------------------------------------------------

def _line_conic_roots(conic: Conic, la, lb, lc):
    """Real intersections of ``la x + lb y + lc = 0`` with the conic."""
    la, lb, lc = Fraction(la), Fraction(lb), Fraction(lc)
    n2 = la * la + lb * lb
    if n2 == 0:
        return []
    p0 = (-lc * la / n2, -lc * lb / n2)
    dvec = (-lb, la)
    a, b, d = conic.a, conic.b, conic.d
    q2 = a * dvec[0] ** 2 + b * dvec[1] ** 2 + 2 * d * dvec[0] * dvec[1]
    gx, gy, _ = conic.grad(*p0)
    q1 = dvec[0] * gx + dvec[1] * gy
    q0 = conic.value(*p0)
    return [(float(p0[0] + s * dvec[0]), float(p0[1] + s * dvec[1]))
            for s in _polish(_quadratic_roots(q2, q1, q0), q2, q1, q0)]


def _quadratic_roots(q2, q1, q0):
    """Real roots of ``q2 s^2 + 2 q1 s + q0`` (exact discriminant)."""
    if q2 == 0:
        if q1 == 0:
            return []
        return [float(-q0 / (2 * q1))]
    disc = q1 * q1 - q2 * q0
    if disc < 0:
        return []
    if disc == 0:
        return [float(-q1 / q2)]
    r = math.sqrt(disc)
    q1f = float(q1)
    # numerically stable pair
    big = -(q1f + math.copysign(r, q1f))
    roots = [big / float(q2), float(q0) / big] if big != 0 else [0.0, 0.0]
    return sorted(roots)


def _polish(roots, q2, q1, q0):
    q2, q1, q0 = float(q2), float(q1), float(q0)
    out = []
    for s in roots:
        f = q2 * s * s + 2 * q1 * s + q0
        df = 2 * q2 * s + 2 * q1
        if df != 0 and abs(f) > 1e-12:
            s -= f / df
        out.append(s)
    return out


def extreme_points(conic: Conic) -> list[tuple[float, float]]:
    """Curve points with a horizontal or vertical tangent."""
    ConicCurve(conic)  # raises NoRealLocus for imaginary ellipses
    pts = _line_conic_roots(conic, conic.a, conic.d, conic.i)  # X = 0
    pts += _line_conic_roots(conic, conic.d, conic.b, conic.j)  # Y = 0
    return _dedupe(pts)


def frame_intersections(conic: Conic, frame: Frame) -> list[tuple[float, float]]:
    pts = []
    for x in (frame.xmin, frame.xmax):
        for px, py in _line_conic_roots(conic, 1, 0, -x):
            if float(frame.ymin) - 1e-12 <= py <= float(frame.ymax) + 1e-12:
                pts.append((float(x), py))
    for y in (frame.ymin, frame.ymax):
        for px, py in _line_conic_roots(conic, 0, 1, -y):
            if float(frame.xmin) - 1e-12 <= px <= float(frame.xmax) + 1e-12:
                pts.append((px, float(y)))
    return _dedupe(pts)


def _dedupe(pts, tol=1e-9):
    out = []
    for p in pts:
        if all(math.hypot(p[0] - q[0], p[1] - q[1]) > tol for q in out):
            out.append(p)
    return out


# --- snapping ---------------------------------------------------------------

def _snap_coord(c: float) -> float:
    r = round(c)
    return float(r) if abs(c - r) < 1e-9 else c


def snap_start(conic: Conic, real_start, curve: ConicCurve | None = None) -> HalfPoint:
    """Grid point next to ``real_start`` that lies closest to the curve.

    Candidates are the (up to) four lattice points of the cell holding
    ``real_start``; ties go to the lexicographically smallest ``(u, v)``.
    """
    curve = curve or ConicCurve(conic)
    x, y = _snap_coord(real_start[0]), _snap_coord(real_start[1])
    xs = sorted({math.floor(x), math.ceil(x)})
    ys = sorted({math.floor(y), math.ceil(y)})
    if len(xs) == 1 and len(ys) == 1:
        return HalfPoint.grid(xs[0], ys[0])
    branch, t0 = curve.locate(x, y)
    w = 3.0 / max(curve.speed(branch, t0), 1e-12)
    if curve.periodic:
        w = min(w, math.pi)
    ranked = []
    for gx in xs:
        for gy in ys:
            _, _, dist = curve.nearest(gx, gy, branch=branch, t_lo=t0 - w, t_hi=t0 + w)
            ranked.append((round(dist, 12), 2 * gx, 2 * gy))
    _, u, v = min(ranked)
    return HalfPoint(u, v)


# --- segment construction ----------------------------------------------------

def _orientation_sign(curve: ConicCurve, branch: int, want_left: bool) -> int:
    """+1 if increasing the parameter keeps F < 0 on the requested side."""
    t = 0.0
    px, py = curve.point(branch, t)
    tx, ty = curve.tangent(branch, t)
    gx, gy = curve.grad(px, py)
    left_is_negative = (tx * gy - ty * gx) < 0
    return 1 if left_is_negative == want_left else -1


def _param_key(curve, branch, t):
    if curve.periodic:
        t = math.remainder(t, TWO_PI)
    return branch, round(t, 9)


def segment_conic(conic: Conic, frame: Frame, ccw: bool, arc=None) -> Segmentation:
    """Monotonic segments of the conic clipped to ``frame``.

    ``arc`` optionally restricts the curve to the piece running from
    ``arc[0]`` to ``arc[1]`` in the traversal sense.
    """
    curve = ConicCurve(conic)
    want_left = compute_b_left(ccw, conic)
    located = {}
    for p in extreme_points(conic) + frame_intersections(conic, frame):
        br, t = curve.locate(*p)
        located.setdefault(br, []).append(t)

    arcs = []  # (branch, t_from, t_to) in traversal order
    for br in curve.branches:
        sense = _orientation_sign(curve, br, want_left)
        ts = sorted(located.get(br, []))
        if arc is not None:
            arcs += _restricted_arcs(curve, br, sense, ts, arc)
            continue
        ts = _unique(ts, curve.periodic)
        pieces = []
        if curve.periodic:
            if not ts:
                ts = [0.0]
            for k in range(len(ts)):
                lo = ts[k]
                hi = ts[k + 1] if k + 1 < len(ts) else ts[0] + TWO_PI
                pieces.append((lo, hi))
        else:
            pieces = list(zip(ts[:-1], ts[1:]))
        if sense < 0:
            pieces = [(hi, lo) for lo, hi in reversed(pieces)]
        inside = [frame.contains(*curve.point(br, 0.5 * (a + b))) for a, b in pieces]
        if curve.periodic and not all(inside) and any(inside):
            # start right after a gap so clipped runs stay contiguous
            k = next(n for n in range(len(pieces)) if not inside[n - 1] and inside[n])
            pieces = pieces[k:] + pieces[:k]
            inside = inside[k:] + inside[:k]
        arcs += [(br, a, b) for (a, b), keep in zip(pieces, inside) if keep]

    if arc is not None:
        arcs = [(br, a, b) for br, a, b in arcs
                if frame.contains(*curve.point(br, 0.5 * (a + b)))]

    snapped = {}

    def snap(br, t):
        key = _param_key(curve, br, t)
        if key not in snapped:
            px, py = curve.point(br, t)
            snapped[key] = snap_start(conic, (float(px), float(py)), curve)
        return snapped[key]

    result = Segmentation([], [], curve)
    for br, ta, tb in arcs:
        pa = tuple(float(c) for c in curve.point(br, ta))
        pb = tuple(float(c) for c in curve.point(br, tb))
        ga, gb = snap(br, ta), snap(br, tb)
        du, dv = gb.u - ga.u, gb.v - ga.v
        seg = dict(start=ga, end=gb, start_real=pa, end_real=pb, branch_id=br,
                   t_start=ta, t_end=tb, b_left=want_left, b_ccw=bool(ccw))
        # the real arc's monotone sense; grid ends must agree with it
        rx, ry = np.sign(pb[0] - pa[0]), np.sign(pb[1] - pa[1])
        if du == 0 or dv == 0 or np.sign(du) != rx or np.sign(dv) != ry:
            result.dropped.append(seg)
            continue
        result.segments.append(MonotonicSegment(s_x=1 if du > 0 else -1,
                                                s_y=1 if dv > 0 else -1, **seg))
    return result


def _unique(ts, periodic):
    out = []
    for t in ts:
        if not out or t - out[-1] > 1e-10:
            out.append(t)
    if periodic and len(out) > 1 and out[0] + TWO_PI - out[-1] <= 1e-10:
        out.pop()
    return out


def _restricted_arcs(curve, branch, sense, ts, arc):
    (x0, y0), (x1, y1) = arc
    b0, t0, _ = curve.nearest(float(x0), float(y0))
    b1, t1, _ = curve.nearest(float(x1), float(y1))
    if b0 != b1:
        raise ValueError("arc end points lie on different branches")
    if b0 != branch:
        return []
    if curve.periodic:
        while (t1 - t0) * sense <= 0:
            t1 += sense * TWO_PI
        while abs(t1 - t0) > TWO_PI:
            t1 -= sense * TWO_PI
    elif (t1 - t0) * sense <= 0:
        raise ValueError("arc_end precedes arc_start for this orientation")
    lo, hi = min(t0, t1), max(t0, t1)
    cuts = []
    for t in ts:
        cand = [t]
        if curve.periodic:
            cand = [t + k * TWO_PI for k in (-2, -1, 0, 1, 2)]
        cuts += [c for c in cand if lo + 1e-10 < c < hi - 1e-10]
    knots = [lo] + _unique(sorted(cuts), False) + [hi]
    pieces = list(zip(knots[:-1], knots[1:]))
    if sense < 0:
        pieces = [(b, a) for a, b in reversed(pieces)]
    return [(branch, a, b) for a, b in pieces]


def build_segments(conic: Conic, frame: Frame, ccw: bool, arc=None) -> list[MonotonicSegment]:
    segs = segment_conic(conic, frame, ccw, arc).segments
    if not segs:
        raise EmptyAfterClipping(f"no monotonic segment of {conic} inside {frame}")
    return segs


__all__ = [
    "Frame", "MonotonicSegment", "Segmentation", "extreme_points", "frame_intersections",
    "snap_start", "segment_conic", "build_segments", "NoRealLocus",
]
