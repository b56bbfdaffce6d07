"""Knuth's Algorithm T loop (4-connected), kept as a comparison reference.

Registers follow the trace table convention: at grid point (x, y)

    q = F(M)                      M = (x + Sx/2, y + Sy/2)
    r = F(M) - F(M + Sx e_x)
    s = F(M + Sy e_y) - F(M)

Knuth's own loop is the direction (-1, +1); the other three directions are
the same loop seen through a coordinate reflection, which only changes the
signs of the mixed-term increments.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Conic, HalfPoint, boole, residue
from .errors import StepBudgetExceeded
from .segmentation import MonotonicSegment

# Knuth's case labels for each monotonic direction
CASES = {(1, 1): "T2", (1, -1): "T3", (-1, 1): "T4", (-1, -1): "T5"}


def _report(v4: int):
    f = Fraction(v4, 4)
    return int(f) if f.denominator == 1 else f


@dataclass
class TState:
    x: Fraction | int
    y: Fraction | int
    q: Fraction | int
    r: Fraction | int
    s: Fraction | int

    def row(self) -> tuple:
        return (self.x, self.y, self.q, self.r, self.s)


def _mid(p: HalfPoint, sx: int, sy: int) -> HalfPoint:
    return p + (sx, sy)


def registers(conic: Conic, p: HalfPoint, sx: int, sy: int) -> tuple[int, int, int]:
    """(q, r, s) at ``p`` by direct evaluation, in 4F units."""
    m = _mid(p, sx, sy)
    fm = residue(conic, m)
    return fm, fm - residue(conic, m + (2 * sx, 0)), residue(conic, m + (0, 2 * sy)) - fm


def run_t(conic: Conic, start=None, quadrant: MonotonicSegment | None = None):
    """Run the T loop over ``quadrant`` from ``start`` (default: its start).

    Returns (points, table); ``table`` holds one TState per visited point
    before the move taken from it. QM >= 0 means an x-move when the segment
    constant is 0, which is the sense of the original loop.
    """
    seg = quadrant
    p = seg.start if start is None else (start if isinstance(start, HalfPoint) else HalfPoint.grid(*start))
    sx, sy, lxy = seg.s_x, seg.s_y, seg.b_lxy
    a, b, d = conic.a, conic.b, conic.d
    q, r, s = registers(conic, p, sx, sy)
    points, table = [p], []
    budget = (abs(seg.end.u - p.u) + abs(seg.end.v - p.v)) // 2 + 4
    while p != seg.end:
        if len(table) >= budget:
            raise StepBudgetExceeded(f"T loop did not reach {seg.end}")
        if (q, r, s) != registers(conic, p, sx, sy):
            raise RuntimeError(f"T registers drifted at {p}")
        table.append(TState(p.x if not p.is_grid else p.grid_xy()[0],
                            p.y if not p.is_grid else p.grid_xy()[1],
                            _report(q), _report(r), _report(s)))
        if p.u == seg.end.u:
            xmove = False
        elif p.v == seg.end.v:
            xmove = True
        else:
            xmove = boole(q >= 0) ^ lxy
        if xmove:
            q -= r
            r -= 8 * a
            s += 8 * d * sx * sy
            p = p + (2 * sx, 0)
        else:
            q += s
            s += 8 * b
            r -= 8 * d * sx * sy
            p = p + (0, 2 * sy)
        points.append(p)
    return points, table
