"""Hot numeric loops, written so they compile under numba unchanged.

Two kernels live here: the monomial-sum evaluator behind every symbolic
kernel evaluation, and the adaptive Runge-Kutta integrator for the
scaled spherical ODE.  `backend` decides whether the loop versions get
jitted or the vectorised numpy twins are used instead.

All accumulation is compensated (Kahan) so that long alternating sums
of large monomials lose as little as possible to rounding.
"""

import cmath
import math

import numpy as np


def _powi(base, e):
    # binary powering for integer exponents of either sign
    if e == 0:
        return 1.0
    n = e if e > 0 else -e
    acc = 1.0
    b = base
    while n:
        if n & 1:
            acc *= b
        b *= b
        n >>= 1
    if e > 0:
        return acc
    return 1.0 / acc


def eval_sum_loop(coeff, rpow, jpow, a1, a2, b1, b2, two_e, tau_inv_pows,
                  zeta, shift, re_offset, r, out):
    """Evaluate a compiled symbolic sum on a grid of radii.

    Each term is coeff * r^p * tau^-j * sinh^a1(r) cosh^a2(r)
    * sinh^b1(r/2) cosh^b2(r/2) times the Gaussian exp(-zeta r^2),
    zeta = 1/(4 tau).  Hyperbolics are rewritten as
    sinh(r) = e^r (1 - e^-2r)/2 etc. so a common factor
    exp((E + shift) r - zeta r^2 + re_offset) can be pulled out of the
    whole sum; E = two_e/2 is shared by every term of a derivative
    chain and the 2^-exponents are folded into coeff beforehand.
    `shift` adds a deliberate exponential rescaling (evaluating
    h * e^{Qr/2} without underflow), `re_offset` adds a real constant
    to the exponent (removing a known modulus factor).
    """
    n = r.shape[0]
    nt = coeff.shape[0]
    for i in range(n):
        x = r[i]
        em1 = math.expm1(-x)
        em2 = math.expm1(-2.0 * x)
        fsh = -em2
        fch = 2.0 + em2
        fsh2 = -em1
        fch2 = 2.0 + em1
        sre = 0.0
        cre = 0.0
        sim = 0.0
        cim = 0.0
        for t in range(nt):
            base = coeff[t] * _powi(x, rpow[t])
            if a1[t] != 0:
                base *= _powi(fsh, a1[t])
            if a2[t] != 0:
                base *= _powi(fch, a2[t])
            if b1[t] != 0:
                base *= _powi(fsh2, b1[t])
            if b2[t] != 0:
                base *= _powi(fch2, b2[t])
            tp = tau_inv_pows[jpow[t]]
            y = base * tp.real - cre
            s = sre + y
            cre = (s - sre) - y
            sre = s
            y = base * tp.imag - cim
            s = sim + y
            cim = (s - sim) - y
            sim = s
        w = complex((0.5 * two_e + shift) * x + re_offset, 0.0) - zeta * (x * x)
        out[i] = complex(sre, sim) * cmath.exp(w)
    return 0


def eval_sum_numpy(coeff, rpow, jpow, a1, a2, b1, b2, two_e, tau_inv_pows,
                   zeta, shift, re_offset, r, out):
    """Vectorised twin of eval_sum_loop (term loop, point vectors)."""
    x = r
    em1 = np.expm1(-x)
    em2 = np.expm1(-2.0 * x)
    fsh = -em2
    fch = 2.0 + em2
    fsh2 = -em1
    fch2 = 2.0 + em1
    sre = np.zeros_like(x)
    cre = np.zeros_like(x)
    sim = np.zeros_like(x)
    cim = np.zeros_like(x)
    for t in range(coeff.shape[0]):
        base = coeff[t] * x ** rpow[t]
        if a1[t]:
            base = base * fsh ** float(a1[t])
        if a2[t]:
            base = base * fch ** float(a2[t])
        if b1[t]:
            base = base * fsh2 ** float(b1[t])
        if b2[t]:
            base = base * fch2 ** float(b2[t])
        tp = tau_inv_pows[jpow[t]]
        y = base * tp.real - cre
        s = sre + y
        cre = (s - sre) - y
        sre = s
        y = base * tp.imag - cim
        s = sim + y
        cim = (s - sim) - y
        sim = s
    w = (0.5 * two_e + shift) * x + re_offset - zeta * (x * x)
    np.multiply(sre + 1j * sim, np.exp(w), out=out)
    return 0


# Dormand-Prince 5(4) tableau
_DP_C2 = 1.0 / 5.0
_DP_C3 = 3.0 / 10.0
_DP_C4 = 4.0 / 5.0
_DP_C5 = 8.0 / 9.0

_A21 = 1.0 / 5.0
_A31 = 3.0 / 40.0
_A32 = 9.0 / 40.0
_A41 = 44.0 / 45.0
_A42 = -56.0 / 15.0
_A43 = 32.0 / 9.0
_A51 = 19372.0 / 6561.0
_A52 = -25360.0 / 2187.0
_A53 = 64448.0 / 6561.0
_A54 = -212.0 / 729.0
_A61 = 9017.0 / 3168.0
_A62 = -355.0 / 33.0
_A63 = 46732.0 / 5247.0
_A64 = 49.0 / 176.0
_A65 = -5103.0 / 18656.0
_B1 = 35.0 / 384.0
_B3 = 500.0 / 1113.0
_B4 = 125.0 / 192.0
_B5 = -2187.0 / 6784.0
_B6 = 11.0 / 84.0
_E1 = 35.0 / 384.0 - 5179.0 / 57600.0
_E3 = 500.0 / 1113.0 - 7571.0 / 16695.0
_E4 = 125.0 / 192.0 - 393.0 / 640.0
_E5 = -2187.0 / 6784.0 + 92097.0 / 339200.0
_E6 = 11.0 / 84.0 - 187.0 / 2100.0
_E7 = -1.0 / 40.0


def phi_rk(c1, c2, q_half, ss, r0, u0, v0, nodes, rtol, atol, hmax, max_steps,
           out_u, out_v):
    """Integrate the exponentially rescaled spherical ODE through `nodes`.

    The unknown is uhat = e^{Qr/2} phi_s with
        uhat'' + (b(r) - Q) uhat' + (s^2 + Q^2/2 - b(r) Q/2) uhat = 0,
        b(r) = c1 coth(r/2) + c2 tanh(r/2),  Q = 2*q_half.
    uhat stays O(1) for every radius, which is what makes far-field
    evaluation (r of order hundreds) possible in float64.

    Steps are clamped so each requested node is hit exactly; values of
    (uhat, uhat') land in out_u/out_v.  Returns 0 on success, 1 if the
    step budget is exhausted.
    """
    bigq = 2.0 * q_half
    r = r0
    u = u0
    v = v0
    h = min(hmax, 1e-3)
    idx = 0
    nn = nodes.shape[0]
    steps = 0
    while idx < nn:
        target = nodes[idx]
        if target - r <= 1e-13 * (1.0 + abs(target)):
            out_u[idx] = u
            out_v[idx] = v
            idx += 1
            continue
        hstep = h
        clipped = False
        if r + hstep >= target:
            hstep = target - r
            clipped = True
        # stage 1
        t2 = math.tanh(0.5 * r)
        b = c1 / t2 + c2 * t2
        k1u = v
        k1v = -(b - bigq) * v - (ss + 2.0 * q_half * q_half - 0.5 * b * bigq) * u
        # stage 2
        rr = r + _DP_C2 * hstep
        uu = u + hstep * _A21 * k1u
        vv = v + hstep * _A21 * k1v
        t2 = math.tanh(0.5 * rr)
        b = c1 / t2 + c2 * t2
        k2u = vv
        k2v = -(b - bigq) * vv - (ss + 2.0 * q_half * q_half - 0.5 * b * bigq) * uu
        # stage 3
        rr = r + _DP_C3 * hstep
        uu = u + hstep * (_A31 * k1u + _A32 * k2u)
        vv = v + hstep * (_A31 * k1v + _A32 * k2v)
        t2 = math.tanh(0.5 * rr)
        b = c1 / t2 + c2 * t2
        k3u = vv
        k3v = -(b - bigq) * vv - (ss + 2.0 * q_half * q_half - 0.5 * b * bigq) * uu
        # stage 4
        rr = r + _DP_C4 * hstep
        uu = u + hstep * (_A41 * k1u + _A42 * k2u + _A43 * k3u)
        vv = v + hstep * (_A41 * k1v + _A42 * k2v + _A43 * k3v)
        t2 = math.tanh(0.5 * rr)
        b = c1 / t2 + c2 * t2
        k4u = vv
        k4v = -(b - bigq) * vv - (ss + 2.0 * q_half * q_half - 0.5 * b * bigq) * uu
        # stage 5
        rr = r + _DP_C5 * hstep
        uu = u + hstep * (_A51 * k1u + _A52 * k2u + _A53 * k3u + _A54 * k4u)
        vv = v + hstep * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v)
        t2 = math.tanh(0.5 * rr)
        b = c1 / t2 + c2 * t2
        k5u = vv
        k5v = -(b - bigq) * vv - (ss + 2.0 * q_half * q_half - 0.5 * b * bigq) * uu
        # stage 6
        rr = r + hstep
        uu = u + hstep * (_A61 * k1u + _A62 * k2u + _A63 * k3u + _A64 * k4u + _A65 * k5u)
        vv = v + hstep * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v)
        t2 = math.tanh(0.5 * rr)
        b = c1 / t2 + c2 * t2
        k6u = vv
        k6v = -(b - bigq) * vv - (ss + 2.0 * q_half * q_half - 0.5 * b * bigq) * uu
        # 5th order solution
        u5 = u + hstep * (_B1 * k1u + _B3 * k3u + _B4 * k4u + _B5 * k5u + _B6 * k6u)
        v5 = v + hstep * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)
        # stage 7 (FSAL) for the error estimate
        t2 = math.tanh(0.5 * rr)
        b = c1 / t2 + c2 * t2
        k7u = v5
        k7v = -(b - bigq) * v5 - (ss + 2.0 * q_half * q_half - 0.5 * b * bigq) * u5
        erru = hstep * (_E1 * k1u + _E3 * k3u + _E4 * k4u + _E5 * k5u + _E6 * k6u + _E7 * k7u)
        errv = hstep * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
        su = atol + rtol * max(abs(u), abs(u5))
        sv = atol + rtol * max(abs(v), abs(v5))
        err = math.sqrt(0.5 * ((erru / su) ** 2 + (errv / sv) ** 2))
        if err <= 1.0:
            r = rr
            u = u5
            v = v5
            if clipped and abs(r - target) <= 1e-13 * (1.0 + abs(target)):
                out_u[idx] = u
                out_v[idx] = v
                idx += 1
        if err > 1e-30:
            fac = 0.9 * err ** (-0.2)
            if fac < 0.2:
                fac = 0.2
            elif fac > 5.0:
                fac = 5.0
        else:
            fac = 5.0
        h = min(hmax, hstep * fac)
        if h < 1e-12:
            h = 1e-12
        steps += 1
        if steps > max_steps:
            return 1
    return 0
