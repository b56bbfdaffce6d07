"""Exact conic algebra on a doubled integer lattice.

A conic is stored as the symmetric matrix ``[[A, D, I], [D, B, J], [I, J, M]]``
with integer entries, so ``F(x, y) = Ax^2 + By^2 + 2Dxy + 2Ix + 2Jy + M``.
The gradient ``(X, Y)`` follows the matrix convention: it is the first two
entries of ``Q @ (x, y, 1)``, i.e. half of the analytic partial derivatives.

Points live on a half-grid: a :class:`HalfPoint` ``(u, v)`` stands for
``(u/2, v/2)`` in grid units, so lattice points and cell midpoints are all
integers. In these units

* ``residue`` returns ``4 F``,
* ``gradient`` returns ``(2X, 2Y, 4W)``,

and ``residue(p) == u*gx + v*gy + gw`` holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import NamedTuple

from .errors import CenterHasNoPolar, DegenerateConic


def boole(value) -> bool:
    """Boolean of a quantity: true iff it is strictly positive."""
    return value > 0


def sign_of(flag: bool) -> int:
    return 1 if flag else -1


@dataclass(frozen=True)
class Conic:
    a: int
    b: int
    d: int
    i: int
    j: int
    m: int

    def __post_init__(self):
        for name in ("a", "b", "d", "i", "j", "m"):
            if not isinstance(getattr(self, name), int):
                raise TypeError(f"coefficient {name} must be an int, use Conic.from_coefficients")
        if self.det == 0:
            raise DegenerateConic(f"determinant is zero for {self}")

    @classmethod
    def from_coefficients(cls, coeffs, delta=1) -> "Conic":
        """Build from six rationals (A, B, D, I, J, M) given in user units.

        The curve is rewritten in grid units ``x_user = delta * x_grid`` and the
        coefficients are scaled by a positive factor to coprime integers.
        """
        a, b, d, i, j, m = (Fraction(c) for c in coeffs)
        delta = Fraction(delta)
        if delta <= 0:
            raise ValueError("delta must be positive")
        scaled = [a * delta**2, b * delta**2, d * delta**2, i * delta, j * delta, m]
        den = reduce(math.lcm, (c.denominator for c in scaled), 1)
        ints = [int(c * den) for c in scaled]
        g = reduce(math.gcd, ints, 0)
        if g > 1:
            ints = [c // g for c in ints]
        return cls(*ints)

    @property
    def dis(self) -> int:
        return self.a * self.b - self.d * self.d

    @property
    def det(self) -> int:
        a, b, d, i, j, m = self.a, self.b, self.d, self.i, self.j, self.m
        return a * (b * m - j * j) - d * (d * m - j * i) + i * (d * j - b * i)

    @property
    def b_det(self) -> bool:
        return self.det > 0

    def matrix(self):
        return ((self.a, self.d, self.i), (self.d, self.b, self.j), (self.i, self.j, self.m))

    # exact rational evaluation, used for identities and checks
    def value(self, x, y) -> Fraction:
        x, y = Fraction(x), Fraction(y)
        return (self.a * x * x + self.b * y * y + 2 * self.d * x * y
                + 2 * self.i * x + 2 * self.j * y + self.m)

    def grad(self, x, y) -> tuple[Fraction, Fraction, Fraction]:
        """(X, Y, W) at a rational point, matrix convention."""
        x, y = Fraction(x), Fraction(y)
        return (self.a * x + self.d * y + self.i,
                self.d * x + self.b * y + self.j,
                self.i * x + self.j * y + self.m)

    def center(self):
        """Rational center, or None for a parabola."""
        dis = self.dis
        if dis == 0:
            return None
        # solve A x + D y = -I, D x + B y = -J
        x = Fraction(-self.i * self.b + self.d * self.j, dis)
        y = Fraction(-self.a * self.j + self.d * self.i, dis)
        return x, y


@dataclass(frozen=True, order=True)
class HalfPoint:
    u: int
    v: int

    @classmethod
    def grid(cls, x: int, y: int) -> "HalfPoint":
        return cls(2 * x, 2 * y)

    @classmethod
    def from_xy(cls, x, y) -> "HalfPoint":
        u, v = 2 * Fraction(x), 2 * Fraction(y)
        if u.denominator != 1 or v.denominator != 1:
            raise ValueError(f"({x}, {y}) is not on the half-grid")
        return cls(int(u), int(v))

    @property
    def x(self) -> Fraction:
        return Fraction(self.u, 2)

    @property
    def y(self) -> Fraction:
        return Fraction(self.v, 2)

    @property
    def is_grid(self) -> bool:
        return self.u % 2 == 0 and self.v % 2 == 0

    def xy(self) -> tuple[float, float]:
        return self.u / 2, self.v / 2

    def grid_xy(self) -> tuple[int, int]:
        return self.u // 2, self.v // 2

    def __add__(self, other):
        return HalfPoint(self.u + other[0], self.v + other[1])

    def __getitem__(self, k):
        return (self.u, self.v)[k]

    def __iter__(self):
        yield self.u
        yield self.v


class GradientPair(NamedTuple):
    """Gradient in half-grid units: ``gx = 2X``, ``gy = 2Y``, ``gw = 4W``."""

    gx: int
    gy: int
    gw: int

    @property
    def X(self) -> Fraction:
        return Fraction(self.gx, 2)

    @property
    def Y(self) -> Fraction:
        return Fraction(self.gy, 2)

    @property
    def W(self) -> Fraction:
        return Fraction(self.gw, 4)

    def dot(self, p: HalfPoint) -> int:
        return p.u * self.gx + p.v * self.gy + self.gw


class PolarLine(NamedTuple):
    """The line ``{(u, v) : u*gx + v*gy + gw = 0}`` in half-grid units."""

    gx: int
    gy: int
    gw: int

    def evaluate(self, p: HalfPoint) -> int:
        """``4 (P.G + W)``; zero on the line."""
        return p.u * self.gx + p.v * self.gy + self.gw

    def direction(self, s_left: int) -> tuple[int, int]:
        """Directed polar ``S_LEFT (k x G)``, in units of 2."""
        return (-s_left * self.gy, s_left * self.gx)


def gradient_from_direction(t: tuple, s_left: int) -> tuple:
    """Recover the pole's gradient from its directed polar: ``S_LEFT (T x k)``."""
    tx, ty = t
    return (s_left * ty, -s_left * tx)


class PolarDistance(NamedTuple):
    factor: Fraction  # (P.G + W) / G^2
    g2: Fraction  # G^2

    @property
    def squared(self) -> Fraction:
        return self.factor * self.factor * self.g2


def residue(conic: Conic, p: HalfPoint) -> int:
    """``4 F(p)`` as an exact integer."""
    u, v = p.u, p.v
    return (conic.a * u * u + conic.b * v * v + 2 * conic.d * u * v
            + 4 * conic.i * u + 4 * conic.j * v + 4 * conic.m)


def gradient(conic: Conic, p: HalfPoint) -> GradientPair:
    u, v = p.u, p.v
    return GradientPair(
        conic.a * u + conic.d * v + 2 * conic.i,
        conic.d * u + conic.b * v + 2 * conic.j,
        2 * conic.i * u + 2 * conic.j * v + 4 * conic.m,
    )


def det_dis(conic: Conic) -> tuple[int, int]:
    return conic.det, conic.dis


def polar_line(conic: Conic, pole: HalfPoint) -> PolarLine:
    g = gradient(conic, pole)
    if g.gx == 0 and g.gy == 0:
        raise CenterHasNoPolar(f"{pole} is the center of {conic}")
    return PolarLine(*g)


def signed_distance_to_polar(conic: Conic, p: HalfPoint, pole: HalfPoint) -> PolarDistance:
    """Scale factor of the directed distance from ``p`` to the polar of ``pole``.

    The directed distance vector is ``factor * G``; its squared length is
    ``factor**2 * G**2``, both exact.
    """
    line = polar_line(conic, pole)
    g2 = Fraction(line.gx * line.gx + line.gy * line.gy, 4)
    return PolarDistance(Fraction(line.evaluate(p), 4) / g2, g2)


def lambda_m(conic: Conic, s_x: int, s_y: int) -> tuple[Fraction, int]:
    """Control factor for the M pair (unit grid) and its integer form ``A + B - 2 SxSy D``."""
    big = conic.a + conic.b - 2 * s_x * s_y * conic.d
    return Fraction(big, 4), big


def inside(conic: Conic, p: HalfPoint) -> bool:
    """Strictly inside; points on the curve are outside."""
    f = residue(conic, p)
    return f != 0 and not (boole(f) ^ conic.b_det)


def b_left(ccw: bool, conic: Conic) -> bool:
    return bool(ccw) ^ conic.b_det


def radius_of_curvature(conic: Conic, point) -> float:
    """Signed ``|G|^3 / DET`` at a point on the curve (grid units)."""
    x, y = float(point[0]), float(point[1])
    f = (conic.a * x * x + conic.b * y * y + 2 * conic.d * x * y
         + 2 * conic.i * x + 2 * conic.j * y + conic.m)
    gx = conic.a * x + conic.d * y + conic.i
    gy = conic.d * x + conic.b * y + conic.j
    g2 = gx * gx + gy * gy
    if abs(f) > 1e-6 * (1 + g2):
        raise ValueError(f"point {point} is not on the curve (F = {f})")
    return g2 ** 1.5 / conic.det
