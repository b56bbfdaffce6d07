# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled walk loop; int64 twin of ``_purekernel.walk``.

The caller guarantees every intermediate fits in 63 bits (see
``engine._fits_int64``); otherwise it runs the pure-Python loop instead.
"""

from .errors import StepBudgetExceeded

cdef enum:
    FORCED = 0
    RULE_A = 1
    RULE_B = 2
    RULE_C = 3
    RULE_D = 4
    RULE_E = 5
    RULE_F = 6
    RULE_G = 7
    RULE_H = 8


cdef inline long long _res(long long a, long long b, long long d, long long i,
                           long long j, long long m, long long u, long long v) nogil:
    return a * u * u + b * v * v + 2 * d * u * v + 4 * i * u + 4 * j * v + 4 * m


cdef inline bint _valid(long long x, long long y, bint bxs, bint bys, bint lxy) nogil:
    if x == 0 or y == 0:
        return False
    return (not (bys ^ (y > 0) ^ lxy)) and (bxs ^ (x > 0) ^ lxy)


def walk(long long a, long long b, long long d, long long i, long long j, long long m,
         long long u, long long v, long long ue, long long ve, int sx, int sy,
         bint lxy, bint eight, bint two_point, long long budget):
    cdef long long lam_m = a + b - 2 * sx * sy * d
    cdef bint bxs = sx > 0
    cdef bint bys = sy > 0
    cdef long long mu = u + sx
    cdef long long mv = v + sy
    cdef long long xm = a * mu + d * mv + 2 * i
    cdef long long ym = d * mu + b * mv + 2 * j
    cdef long long fm, fh, fv, dm, dh, dv, hu, vv_, xh, yh, xv, yv
    cdef long long steps = 0, m_ok = 0, h_ok = 0, v_ok = 0, ooc = 0, ooa = 0, forced = 0
    cdef int mx, my, code, pick, cm, ch, cv
    cdef bint vm, vh, vvld, blam
    us = [u]
    vs = [v]
    codes = []
    while u != ue or v != ve:
        if steps >= budget:
            raise StepBudgetExceeded(f"no end point after {steps} steps")
        steps += 1
        if u == ue:
            mx = 0; my = 1; code = FORCED
            forced += 1
        elif v == ve:
            mx = 1; my = 0; code = FORCED
            forced += 1
        else:
            fm = _res(a, b, d, i, j, m, mu, mv)
            if (fm > 0) != (fm + lam_m > 0):
                ooa += 1
            vm = _valid(xm, ym, bxs, bys, lxy)
            dm = fm + lam_m if two_point else fm
            cm = 1 if ((dm > 0) ^ lxy) else 2
            if vm:
                m_ok += 1
            pick = 0
            if eight:
                hu = mu + sx
                xh = xm + a * sx
                yh = ym + d * sx
                fh = _res(a, b, d, i, j, m, hu, mv)
                vh = _valid(xh, yh, bxs, bys, lxy)
                dh = fh + b if two_point else fh
                ch = 1 if ((dh > 0) ^ lxy) else 3
                vv_ = mv + sy
                xv = xm + d * sy
                yv = ym + b * sy
                fv = _res(a, b, d, i, j, m, mu, vv_)
                vvld = _valid(xv, yv, bxs, bys, lxy)
                dv = fv + a if two_point else fv
                cv = 3 if ((dv > 0) ^ lxy) else 2
                if vh:
                    h_ok += 1
                if vvld:
                    v_ok += 1
                if not (vm or vh or vvld):
                    code = RULE_A
                elif vh and vvld:
                    if ch == 1 and cv == 2:
                        if vm:
                            code = RULE_C; pick = cm
                        else:
                            code = RULE_B
                    elif ch == 3 and cv == 3:
                        code = RULE_D; pick = 3
                    elif ch == 1:
                        code = RULE_E; pick = 1
                    else:
                        code = RULE_E; pick = 2
                elif vh or vvld:
                    if (vh and ch == 3) or (vvld and cv == 3):
                        code = RULE_F; pick = 3
                    else:
                        code = RULE_G
                        if vm:
                            pick = cm
                else:
                    code = RULE_H; pick = cm
            else:
                if vm:
                    code = RULE_H; pick = cm
                else:
                    code = RULE_A
            if pick == 0:
                ooc += 1
                if lam_m == 0:
                    blam = not (fm > 0)
                else:
                    blam = lam_m > 0
                pick = 1 if not (blam ^ lxy) else 2
            mx = 1 if pick != 2 else 0
            my = 1 if pick != 1 else 0
        codes.append(code)
        u += 2 * sx * mx
        v += 2 * sy * my
        xm += 2 * (mx * sx * a + my * sy * d)
        ym += 2 * (mx * sx * d + my * sy * b)
        mu = u + sx
        mv = v + sy
        if xm != a * mu + d * mv + 2 * i or ym != d * mu + b * mv + 2 * j:
            raise RuntimeError(f"midpoint gradient drifted at ({u}, {v})")
        us.append(u)
        vs.append(v)
    return us, vs, codes, (steps, m_ok, h_ok, v_ok, ooc, ooa, forced)
