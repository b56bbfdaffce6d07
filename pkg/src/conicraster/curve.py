"""Floating-point parametrisation of a non-degenerate real conic.

Used at build time (segmentation) and by the oracle; the stepping engine
never touches floats.

* ellipse:   P(t) = c + a1 cos t e1 + a2 sin t e2
* hyperbola: P(s, t) = c + s a1 cosh t e1 + a2 sinh t e2, branch s = +1 / -1
* parabola:  P(s) = s e + h(s) n, with n spanning the null space of the
  quadratic part
"""

from __future__ import annotations

import math

import numpy as np

from .core import Conic
from .errors import NoRealLocus


class ConicCurve:
    def __init__(self, conic: Conic):
        self.conic = conic
        a, b, d = float(conic.a), float(conic.b), float(conic.d)
        i, j, m = float(conic.i), float(conic.j), float(conic.m)
        self._q = (a, b, d, i, j, m)
        dis = conic.dis
        if dis == 0:
            self.kind = "parabola"
            if conic.a != 0 or conic.d != 0:
                n = np.array([-d, a])
            else:
                n = np.array([1.0, 0.0])
            n /= np.hypot(*n)
            e = np.array([-n[1], n[0]])
            nb = n @ np.array([i, j])
            self._e, self._n = e, n
            self._lam = a + b
            self._eb = e @ np.array([i, j])
            self._nb = nb
            self.branches = (0,)
            self.periodic = False
            return
        cx, cy = conic.center()
        self.center = np.array([float(cx), float(cy)])
        k = conic.det / dis
        lams, vecs = np.linalg.eigh(np.array([[a, d], [d, b]]))
        if dis > 0:
            if -k / lams[0] <= 0 or -k / lams[1] <= 0:
                raise NoRealLocus(f"{conic} is an imaginary ellipse")
            self.kind = "ellipse"
            self._axes = (math.sqrt(-k / lams[0]), math.sqrt(-k / lams[1]))
            self._vecs = (vecs[:, 0], vecs[:, 1])
            self.branches = (0,)
            self.periodic = True
        else:
            self.kind = "hyperbola"
            p, q = (0, 1) if -k / lams[0] > 0 else (1, 0)
            self._axes = (math.sqrt(-k / lams[p]), math.sqrt(k / lams[q]))
            self._vecs = (vecs[:, p], vecs[:, q])
            self.branches = (0, 1)
            self.periodic = False

    # --- evaluation -----------------------------------------------------
    def F(self, x, y):
        a, b, d, i, j, m = self._q
        return a * x * x + b * y * y + 2 * d * x * y + 2 * i * x + 2 * j * y + m

    def grad(self, x, y):
        a, b, d, i, j, _ = self._q
        return a * x + d * y + i, d * x + b * y + j

    def point(self, branch, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "parabola":
            h = -(self._lam * t * t + 2 * t * self._eb + self._q[5]) / (2 * self._nb)
            return t * self._e[0] + h * self._n[0], t * self._e[1] + h * self._n[1]
        (a1, a2), (e1, e2) = self._axes, self._vecs
        if self.kind == "ellipse":
            w1, w2 = a1 * np.cos(t), a2 * np.sin(t)
        else:
            s = 1.0 if branch == 0 else -1.0
            w1, w2 = s * a1 * np.cosh(t), a2 * np.sinh(t)
        c = self.center
        return c[0] + w1 * e1[0] + w2 * e2[0], c[1] + w1 * e1[1] + w2 * e2[1]

    def tangent(self, branch, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "parabola":
            dh = -(2 * self._lam * t + 2 * self._eb) / (2 * self._nb)
            return self._e[0] + dh * self._n[0], self._e[1] + dh * self._n[1]
        (a1, a2), (e1, e2) = self._axes, self._vecs
        if self.kind == "ellipse":
            w1, w2 = -a1 * np.sin(t), a2 * np.cos(t)
        else:
            s = 1.0 if branch == 0 else -1.0
            w1, w2 = s * a1 * np.sinh(t), a2 * np.cosh(t)
        return w1 * e1[0] + w2 * e2[0], w1 * e1[1] + w2 * e2[1]

    def locate(self, x, y):
        """(branch, parameter) of a point on (or very near) the curve."""
        if self.kind == "parabola":
            return 0, float(self._e @ np.array([x, y]))
        (a1, a2), (e1, e2) = self._axes, self._vecs
        rel = np.array([x, y]) - self.center
        w1, w2 = rel @ e1, rel @ e2
        if self.kind == "ellipse":
            return 0, math.atan2(w2 / a2, w1 / a1)
        return (0 if w1 >= 0 else 1), math.asinh(w2 / a2)

    def speed(self, branch, t):
        tx, ty = self.tangent(branch, t)
        return float(np.hypot(tx, ty))

    def nearest(self, x, y, branch=None, t_lo=None, t_hi=None, samples=4096):
        """Nearest curve point by dense sampling plus local refinement.

        Without bounds the whole ellipse, or a window wide enough to hold
        the point's neighbourhood on open curves, is scanned.
        """
        from scipy.optimize import minimize_scalar

        branches = self.branches if branch is None else (branch,)
        best = None
        for br in branches:
            lo, hi = t_lo, t_hi
            if lo is None or hi is None:
                lo, hi = self._default_window(br, x, y)
            ts = np.linspace(lo, hi, samples)
            px, py = self.point(br, ts)
            d2 = (px - x) ** 2 + (py - y) ** 2
            k = int(np.argmin(d2))
            a, b = ts[max(k - 1, 0)], ts[min(k + 1, samples - 1)]

            def f(t):
                qx, qy = self.point(br, t)
                return float((qx - x) ** 2 + (qy - y) ** 2)

            if b > a:
                res = minimize_scalar(f, bounds=(a, b), method="bounded",
                                      options={"xatol": 1e-13})
                t, val = float(res.x), float(res.fun)
                if d2[k] < val:
                    t, val = float(ts[k]), float(d2[k])
            else:
                t, val = float(ts[k]), float(d2[k])
            if best is None or val < best[2]:
                best = (br, t, val)
        br, t, val = best
        return br, t, math.sqrt(val)

    def _default_window(self, branch, x, y):
        if self.kind == "ellipse":
            return -math.pi, math.pi
        _, t0 = self.locate(x, y)
        # open curves: bracket by arc length around the rough location
        span = 8.0 + math.hypot(x, y)
        sp = max(self.speed(branch, t0), 1e-12)
        w = span / sp
        if self.kind == "hyperbola":
            w = min(w, 40.0)
        return t0 - w, t0 + w
