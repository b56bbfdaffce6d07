from fractions import Fraction
from functools import lru_cache

import pytest

from conicraster.core import Conic
from conicraster.segmentation import Frame, segment_conic

CIRCLE = Conic(1, 1, 0, 0, 0, -25)
ELLIPSE = Conic(1, 225, 0, 0, 0, -225)
HYPERBOLA = Conic(24, 4, 10, 17, 7, 8)
THIN = Conic.from_coefficients((-160, -921, Fraction(767, 2), -52, Fraction(249, 2), 0))
KNUTH = Conic(20, 20, 0, 0, 0, -291)

# name -> (conic, frame, ccw, arc)
SUITE = {
    "circle": (CIRCLE, Frame(-10, -10, 10, 10), False, None),
    "ellipse": (ELLIPSE, Frame(-16, -2, 16, 2), True, None),
    "hyperbola": (HYPERBOLA, Frame(-10, -10, 10, 10), True, None),
    "thin": (THIN, Frame(-10, -5, 10, 5), True, ((0, 0), (7, 3))),
}


@lru_cache(maxsize=None)
def segments_of(name):
    if name == "knuth":
        return tuple(segment_conic(KNUTH, Frame(0, 0, 10, 10), True).segments)
    conic, frame, ccw, arc = SUITE[name]
    return tuple(segment_conic(conic, frame, ccw, arc).segments)


def conic_of(name):
    return KNUTH if name == "knuth" else SUITE[name][0]


def quadrant(conic, segs, sx, sy):
    return next(s for s in segs if (s.s_x, s.s_y) == (sx, sy))


@pytest.fixture
def circle_quadrant():
    """Clockwise quarter of x^2 + y^2 = 25 from (0, 5) to (5, 0)."""
    return quadrant(CIRCLE, segments_of("circle"), 1, -1)


# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
