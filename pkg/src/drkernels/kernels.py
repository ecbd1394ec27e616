"""Heat and Schrodinger kernels of the radial Laplacian, with bound envelopes.

The closed derivative chain from `symbolic` gives the kernel directly
when the center dimension k is even.  For odd k one integral remains,
over s > r against sinh s (cosh s - cosh r)^{-1/2} ds; substituting
cosh s = cosh r + w^2 turns that measure into exactly 2 dw and removes
the endpoint singularity.  The integral is then done on cells sized to
the Gaussian phase, with epsilon-algorithm acceleration whenever the
phase oscillates faster than the modulus decays.

The overall constant multiplying the chain is pinned by requiring unit
mass of the heat kernel at tau = 1, which is equivalent to the
spherical transform of h_tau being exp(-Q^2 tau/4) exp(-tau s^2); the
transform tests exercise this for every test space.  For (m, k) = (2, 0)
the constant comes out as (4 pi)^{-1/2}.

Two evaluation conveniences used throughout the package:

* shift: values are returned multiplied by exp(shift * r), so callers
  integrating against exponentially growing weights never form
  huge-times-tiny products;
* reduced: the modulus factors exp(-Re(1/(4 tau)) r^2) and
  exp(-Q^2 Re tau / 4) are removed exactly in the exponent, keeping
  sweep magnitudes of order poly(r) for bound-ratio scans.
"""

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import symbolic
from .geometry import (Decay, RadialFunction, SpaceParams, density_A,
                       distance_to_identity, log_density_derivative,
                       modular_delta)
from .quadrature import (NonConvergenceError, gauss_legendre,
                         integrate_panels, wynn_epsilon)

R_MIN = symbolic.R_MIN_DEFAULT

_TAIL_ORDER = 16
_TAIL_MAX_CELLS = 600
# w-substitution boundary values overflow in float64 past this radius
_TAIL_MAX_R = 350.0


@dataclass(frozen=True)
class ComplexTime:
    """Complex time with Re tau >= 0 and tau != 0."""

    tau: complex

    def __post_init__(self):
        t = complex(self.tau)
        if t == 0 or t.real < 0:
            raise ValueError("complex time needs Re tau >= 0 and tau != 0")
        object.__setattr__(self, "tau", t)

    @property
    def modulus(self):
        return abs(self.tau)

    @property
    def phase(self):
        return cmath.phase(self.tau)


def as_time(tau):
    """Validated plain complex from a ComplexTime or any complex-like."""
    if isinstance(tau, ComplexTime):
        return tau.tau
    return ComplexTime(complex(tau)).tau


@dataclass(frozen=True)
class KernelValue:
    value: complex
    r: float
    tau: complex
    method: str
    quad_error: float


@dataclass(frozen=True)
class BoundEnvelope:
    regime: str
    value: float


@lru_cache(maxsize=None)
def mass_constant(m, k):
    """Normalization giving the tau=1 heat kernel unit mass against A dr."""
    p = SpaceParams(m, k)
    chain = symbolic.inverse_abel_chain(m, k)
    if k % 2 == 0:
        def fvec(r):
            return symbolic.evaluate(chain, r, 1.0, r_min=0.0) * density_A(p, r)
    else:
        def fvec(r):
            r = np.atleast_1d(np.asarray(r, dtype=float))
            vals = np.empty(r.shape, dtype=complex)
            for i, ri in enumerate(r):
                vals[i], _, _ = _tail_point(p, chain, 1.0 + 0.0j, float(ri),
                                            shift=0.0, reduced=False,
                                            tol=1e-13)
            return vals * density_A(p, r)
    # integrand ~ poly * exp(Q r / 2 - r^2 / 4); push the cutoff until the
    # exponent argument sits ~60 below its peak value Q^2/4
    r_hi = p.Q + math.sqrt(p.Q * p.Q + 260.0)
    total, _ = integrate_panels(fvec, 1e-6, r_hi, tol=1e-13, order=20)
    return math.exp(0.25 * p.Q ** 2) / total.real


def kernel_grid(p, tau, r, *, shift=0.0, reduced=False, tol=1e-10,
                r_min=R_MIN):
    """h_tau(r) * exp(shift * r) on an array of radii.

    With reduced=True the result carries the extra factor
    exp(Re(1/(4 tau)) r^2 + Q^2 Re tau / 4), applied inside the
    exponent so nothing overflows.  Returns (values, errors); the error
    is a quadrature estimate, identically zero on the even-k path.
    Radii below ~1e-3 lose pointwise relative accuracy to monomial
    cancellation and are only meant for A-weighted integrands.
    """
    tau = as_time(tau)
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    chain = symbolic.inverse_abel_chain(p.m, p.k)
    pref = mass_constant(p.m, p.k) / cmath.sqrt(tau)
    if reduced:
        pref *= cmath.exp(-0.25j * p.Q ** 2 * tau.imag)
    else:
        pref *= cmath.exp(-0.25 * p.Q ** 2 * tau)
    if p.k % 2 == 0:
        vals = symbolic.evaluate(chain, rr, tau, r_min=r_min, shift=shift,
                                 pure_phase=reduced)
        errs = np.zeros(rr.shape)
    else:
        vals = np.empty(rr.shape, dtype=complex)
        errs = np.empty(rr.shape)
        for i, ri in enumerate(rr):
            if ri < r_min * (1.0 - 1e-12):
                raise ValueError("radius %g below r_min %g" % (ri, r_min))
            vals[i], errs[i], _ = _tail_point(p, chain, tau, float(ri),
                                              shift=shift, reduced=reduced,
                                              tol=tol)
    return pref * vals, abs(pref) * errs


def kernel_h(p, tau, r):
    """Single kernel value with method tag and quadrature error."""
    tau = as_time(tau)
    vals, errs = kernel_grid(p, tau, float(r))
    method = "even-closed-form" if p.k % 2 == 0 else "odd-quadrature"
    return KernelValue(complex(vals[0]), float(r), tau, method,
                       float(errs[0]))


def schrodinger_kernel(p, t, r):
    t = float(t)
    if t == 0.0:
        raise ValueError("t must be nonzero")
    return kernel_h(p, 1j * t, r)


def odd_k_integral(p, tau, r, tol=1e-10):
    """The raw closing integral 2 int_0^inf G(s(w)) dw for odd k.

    G is the derivative chain applied to the Gaussian, s(w) =
    arccosh(cosh r + w^2).  Returns (value, error_estimate); raises
    NonConvergenceError with the partial value attached if the cell
    budget runs out first.
    """
    if p.k % 2 == 0:
        raise ValueError("closing integral only applies to odd k")
    tau = as_time(tau)
    chain = symbolic.inverse_abel_chain(p.m, p.k)
    val, err, ok = _tail_point(p, chain, tau, float(r), shift=0.0,
                               reduced=False, tol=tol)
    if not ok:
        raise NonConvergenceError(
            "tail cells exhausted at error %.3g" % err, partial=val)
    return val, err


def _w_of(s, ri):
    # sqrt(cosh s - cosh ri) through the product form, stable for s near ri
    return math.sqrt(2.0 * math.sinh(0.5 * (s + ri)) *
                     math.sinh(0.5 * (s - ri)))


def _ln_weight(sn, ri):
    # log of sinh s / sqrt(cosh s - cosh ri) without forming either factor
    l1 = np.log1p(-np.exp(-2.0 * sn))
    l2 = np.log1p(-np.exp(-(sn + ri)))
    l3 = np.log1p(-np.exp(-(sn - ri)))
    return 0.5 * sn - 0.5 * math.log(2.0) + l1 - 0.5 * (l2 + l3)


def _tail_point(p, chain, tau, ri, *, shift, reduced, tol,
                max_cells=_TAIL_MAX_CELLS):
    """One-point tail integral; returns (value, error, converged).

    Cells advance the squared variable by pi / max(decay, frequency) of
    the Gaussian exponent, capped at unit width; within r + 1 they are
    mapped to the w variable (which owns the endpoint), beyond that the
    s variable with a log-space weight.  Decay-dominated runs stop on
    two negligible cells, oscillation-dominated ones go through the
    epsilon algorithm on the partial sums.
    """
    if ri > _TAIL_MAX_R:
        raise ValueError("tail integral limited to r <= %g" % _TAIL_MAX_R)
    tau = complex(tau)
    zeta = 0.25 / tau
    mu = zeta.real
    nu = abs(zeta.imag)
    comp = symbolic.compile_sum(chain)
    sigma0 = -0.5 * comp.two_e
    re_off = mu * ri * ri if reduced else 0.0
    rate = max(mu, nu)
    oscillatory = nu > mu
    xg, wg = gauss_legendre(_TAIL_ORDER)
    switch = ri + 1.0
    cosh_r = math.cosh(ri)
    total = 0.0 + 0.0j
    sums = []
    last_mag = math.inf
    best = None
    s_lo = ri
    for cell in range(max_cells):
        if rate > 0.0:
            s_hi = math.sqrt(s_lo * s_lo + math.pi / rate)
        else:
            s_hi = s_lo + 1.0
        if s_hi - s_lo > 1.0:
            s_hi = s_lo + 1.0
        if s_lo < switch < s_hi:
            s_hi = switch
        if s_lo < switch:
            w_a = 0.0 if s_lo == ri else _w_of(s_lo, ri)
            w_b = _w_of(s_hi, ri)
            mid = 0.5 * (w_b + w_a)
            half = 0.5 * (w_b - w_a)
            wn = mid + half * xg
            sn = np.arccosh(cosh_r + wn * wn)
            gh = symbolic.evaluate(chain, sn, tau, r_min=0.0, shift=sigma0,
                                   re_offset=re_off)
            fac = np.exp(shift * ri - sigma0 * sn)
            contrib = 2.0 * half * np.dot(wg, gh * fac)
        else:
            mid = 0.5 * (s_hi + s_lo)
            half = 0.5 * (s_hi - s_lo)
            sn = mid + half * xg
            gh = symbolic.evaluate(chain, sn, tau, r_min=0.0, shift=sigma0,
                                   re_offset=re_off)
            fac = np.exp(shift * ri - sigma0 * sn + _ln_weight(sn, ri))
            contrib = half * np.dot(wg, gh * fac)
        total = total + contrib
        sums.append(total)
        mag = abs(contrib)
        scale = max(abs(total), 1e-280)
        if mag <= tol * scale and last_mag <= tol * scale:
            return total, mag + 1e-15 * scale, True
        last_mag = mag
        if oscillatory and len(sums) >= 10 and cell % 4 == 3:
            est, werr = wynn_epsilon(np.array(sums[-40:]))
            escale = max(abs(est), 1e-280)
            if werr <= 0.5 * tol * escale:
                return est, werr + 1e-15 * escale, True
            if best is None or werr < best[1]:
                best = (est, werr)
        s_lo = s_hi
    if best is not None:
        return best[0], best[1], False
    return total, max(last_mag, tol * abs(total)), False


def envelope_values(p, tau, r, *, shift=0.0, reduced=False):
    """Vectorized upper-envelope values times exp(shift r).

    Returns (values, small_regime_mask).  reduced drops the same two
    modulus factors kernel_grid drops, so reduced kernel over reduced
    envelope is the true bound ratio.
    """
    tau = as_time(tau)
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    at = abs(tau)
    zeta = 0.25 / tau
    small = at <= 1.0 + rr
    amp = np.where(small,
                   at ** (-0.5 * p.n) * (1.0 + rr) ** (0.5 * (p.n - 1)),
                   at ** (-1.5) * (1.0 + rr))
    expo = (shift - 0.5 * p.Q) * rr
    if not reduced:
        expo = expo - 0.25 * p.Q ** 2 * tau.real - zeta.real * rr * rr
    return amp * np.exp(expo), small


def upper_bound_envelope(p, tau, r):
    vals, small = envelope_values(p, tau, float(r))
    return BoundEnvelope(regime="small" if bool(small[0]) else "large",
                         value=float(vals[0]))


def lower_bound_envelope(p, t, r, *, c=4.0):
    """Far-region lower comparison shape t^{-n/2} r^{(n-1)/2} e^{-Qr/2}.

    Only defined on r > 1 + c t; c is a knob, 4 by default.
    """
    t = float(t)
    if t <= 0.0:
        raise ValueError("t must be positive")
    rr = np.asarray(r, dtype=float)
    if np.any(rr <= 1.0 + c * t):
        raise ValueError("radius inside the excluded region r <= 1 + c t")
    out = t ** (-0.5 * p.n) * rr ** (0.5 * (p.n - 1)) * np.exp(-0.5 * p.Q * rr)
    if out.ndim == 0:
        return float(out)
    return out


def sigma_kernel(p, t, x):
    """Weighted kernel delta^{1/2}(x) e^{i Q^2 t / 4} s_t(r(x))."""
    r = distance_to_identity(p, x)
    if r < R_MIN:
        raise ValueError("point too close to the identity (r < r_min)")
    phase = cmath.exp(0.25j * p.Q ** 2 * float(t))
    return (modular_delta(p, x.a) ** 0.5) * phase * \
        schrodinger_kernel(p, t, r).value


def sigma_on_slice(p, t, a, *, tol=1e-10):
    """sigma_t at the points (0, 0, a), stable down to a ~ 1e-130.

    On the slice delta^{1/2} = a^{-Q/2} = e^{Q r / 2} with r = |log a|,
    so for a < 1 the weight is exactly the kernel shift and tiny a never
    overflows.
    """
    t = float(t)
    if t == 0.0:
        raise ValueError("t must be nonzero")
    aa = np.atleast_1d(np.asarray(a, dtype=float))
    if np.any(aa <= 0):
        raise ValueError("slice coordinate a must be positive")
    logs = np.log(aa)
    if np.any(np.abs(logs) < R_MIN):
        raise ValueError("slice point too close to the identity")
    out = np.empty(aa.shape, dtype=complex)
    phase = cmath.exp(0.25j * p.Q ** 2 * t)
    for below in (True, False):
        mask = (logs < 0) if below else (logs >= 0)
        if not np.any(mask):
            continue
        rr = np.abs(logs[mask])
        shift = 0.5 * p.Q if below else -0.5 * p.Q
        vals, _ = kernel_grid(p, 1j * t, rr, shift=shift, tol=tol)
        out[mask] = phase * vals
    return out


def kernel_as_radial(p, tau, *, tol=1e-10):
    """Wrap h_tau as a RadialFunction carrying its decay metadata."""
    tau = as_time(tau)
    zeta = 0.25 / tau

    def plain(r):
        return kernel_grid(p, tau, r, r_min=0.0, tol=tol)[0]

    def scaled(r):
        return kernel_grid(p, tau, r, shift=0.5 * p.Q, r_min=0.0, tol=tol)[0]

    decay = Decay(exp_rate=0.5 * p.Q, gauss_rate=zeta.real,
                  phase_rate=abs(zeta.imag), poly_degree=0.5 * (p.n - 1))
    return RadialFunction(plain, decay, r_min=0.0, scaled_evaluator=scaled)


def heat_residual(p, tau, r, *, dt=1e-5, dr=2e-4, tol=1e-13):
    """Pointwise relative residual of d/dtau h = h'' + (A'/A) h'.

    Central differences; the step defaults keep FD truncation and
    quadrature noise both well under 1e-4 for tau in [0.5, 2] and
    r in [0.5, 10], including the stiff corner tau = 0.5, r = 10 where
    the third tau-derivative is of order (r^2 / 4 tau^2)^3.
    """
    tau = as_time(tau)
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    h0, _ = kernel_grid(p, tau, rr, tol=tol)
    hp, _ = kernel_grid(p, tau, rr + dr, tol=tol)
    hm, _ = kernel_grid(p, tau, rr - dr, tol=tol)
    tp, _ = kernel_grid(p, tau + dt, rr, tol=tol)
    tm, _ = kernel_grid(p, tau - dt, rr, tol=tol)
    dtau = (tp - tm) / (2.0 * dt)
    d1 = (hp - hm) / (2.0 * dr)
    d2 = (hp - 2.0 * h0 + hm) / (dr * dr)
    lap = d2 + log_density_derivative(p, rr) * d1
    return np.abs(dtau - lap) / np.abs(h0)
