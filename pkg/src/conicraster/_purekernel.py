"""Reference walk loop in plain Python (arbitrary-precision ints).

Mirrors ``_kernel.pyx`` line for line; the traced stepper in ``engine`` is
built independently from the per-operation functions and the test-suite
checks all three agree.
"""

from .errors import StepBudgetExceeded

# rule codes, shared with _kernel.pyx and engine.RULES
FORCED, RULE_A, RULE_B, RULE_C, RULE_D, RULE_E, RULE_F, RULE_G, RULE_H = range(9)


def walk(a, b, d, i, j, m, u, v, ue, ve, sx, sy, lxy, eight, two_point, budget):
    lam_m = a + b - 2 * sx * sy * d
    bxs = sx > 0
    bys = sy > 0
    mu = u + sx
    mv = v + sy
    xm = a * mu + d * mv + 2 * i
    ym = d * mu + b * mv + 2 * j
    us = [u]
    vs = [v]
    codes = []
    steps = m_ok = h_ok = v_ok = ooc = ooa = forced = 0
    while u != ue or v != ve:
        if steps >= budget:
            raise StepBudgetExceeded(f"no end point after {steps} steps")
        steps += 1
        if u == ue:
            mx, my, code = 0, 1, FORCED
            forced += 1
        elif v == ve:
            mx, my, code = 1, 0, FORCED
            forced += 1
        else:
            fm = a * mu * mu + b * mv * mv + 2 * d * mu * mv + 4 * i * mu + 4 * j * mv + 4 * m
            if (fm > 0) != (fm + lam_m > 0):
                ooa += 1
            vm = (xm != 0 and ym != 0 and not (bys ^ (ym > 0) ^ lxy)
                  and (bxs ^ (xm > 0) ^ lxy))
            dm = fm + lam_m if two_point else fm
            cm = 1 if ((dm > 0) ^ lxy) else 2  # 1 = B, 2 = C
            if vm:
                m_ok += 1
            pick = 0
            if eight:
                hu = mu + sx
                xh = xm + a * sx
                yh = ym + d * sx
                fh = a * hu * hu + b * mv * mv + 2 * d * hu * mv + 4 * i * hu + 4 * j * mv + 4 * m
                vh = (xh != 0 and yh != 0 and not (bys ^ (yh > 0) ^ lxy)
                      and (bxs ^ (xh > 0) ^ lxy))
                dh = fh + b if two_point else fh
                ch = 1 if ((dh > 0) ^ lxy) else 3  # B or D
                vv_ = mv + sy
                xv = xm + d * sy
                yv = ym + b * sy
                fv = a * mu * mu + b * vv_ * vv_ + 2 * d * mu * vv_ + 4 * i * mu + 4 * j * vv_ + 4 * m
                vvld = (xv != 0 and yv != 0 and not (bys ^ (yv > 0) ^ lxy)
                        and (bxs ^ (xv > 0) ^ lxy))
                dv = fv + a if two_point else fv
                cv = 3 if ((dv > 0) ^ lxy) else 2  # D or C
                if vh:
                    h_ok += 1
                if vvld:
                    v_ok += 1
                if not (vm or vh or vvld):
                    code = RULE_A
                elif vh and vvld:
                    if ch == 1 and cv == 2:
                        if vm:
                            code, pick = RULE_C, cm
                        else:
                            code = RULE_B
                    elif ch == 3 and cv == 3:
                        code, pick = RULE_D, 3
                    elif ch == 1:
                        code, pick = RULE_E, 1
                    else:
                        code, pick = RULE_E, 2
                elif vh or vvld:
                    if (vh and ch == 3) or (vvld and cv == 3):
                        code, pick = RULE_F, 3
                    else:
                        code = RULE_G
                        if vm:
                            pick = cm
                else:
                    code, pick = RULE_H, cm
            else:
                if vm:
                    code, pick = RULE_H, cm
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
