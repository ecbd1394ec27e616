"""Radial functional calculus and Schrodinger evolution.

A bounded function of the shifted Laplacian acts on radial data through
the transform pair: measure ℋf on a spectral grid, multiply by m(s),
invert.  The evolution operators are the special cases
m_t(s) = e^{-it(s^2 + Q^2/4)}; the distinguished-Laplacian evolution is
the same radial core seen through the modular twist
u(t, (0,0,a)) = e^{iQ^2 t/4} a^{-Q/2} v(t, |log a|).

An EvolutionRecord holds the whole time-by-radius sample matrix next to
the quadrature weights that produced it, so norms computed later (L^2
conservation, Strichartz windows) reuse exactly the grids the evolution
saw.  Time slices are independent of each other; they are assembled in
grid order, so records are deterministic.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import Decay, RadialFunction, SpaceParams, density_A
from .quadrature import gauss_legendre
from .spherical import (calibrate, density_values, solve_phi_scaled,
                        spherical_transform)

_S_MAX_CAP = 60.0


@dataclass(frozen=True)
class Multiplier:
    """Bounded spectral symbol s -> m(s)."""

    evaluator: object
    note: str = ""

    def __call__(self, s):
        return self.evaluator(s)

    def check_bounded(self, s_max=_S_MAX_CAP):
        samples = np.geomspace(1e-3, s_max, 48)
        vals = np.abs(np.asarray(self.evaluator(samples), dtype=complex))
        if not np.all(np.isfinite(vals)) or np.max(vals) > 1e8:
            raise ValueError("multiplier is not bounded on [0, %g]" % s_max)


@dataclass(frozen=True)
class AdmissiblePair:
    """Exponent pair (p, q); infinities allowed."""

    p: object
    q: object


def _inv(x):
    if x == math.inf:
        return Fraction(0)
    return 1 / Fraction(x)


def is_admissible(p, pair):
    """Membership of (1/p, 1/q) in the admissible set for dimension n.

    The set is (0, 1/2] x (0, 1/2) cut by 2/p + n/q >= n/2, together
    with the isolated point (1/p, 1/q) = (0, 1/2).  Exact when the
    exponents are ints or Fractions; floats are compared through their
    exact binary values.
    """
    x = _inv(pair.p)
    y = _inv(pair.q)
    half = Fraction(1, 2)
    if x == 0 and y == half:
        return True
    return (0 < x <= half and 0 < y < half
            and 2 * x + p.n * y >= Fraction(p.n, 2))


@dataclass
class EvolutionRecord:
    """Sampled radial evolution with its quadrature context."""

    params: SpaceParams
    initial: str
    t: np.ndarray
    r: np.ndarray
    r_meas: np.ndarray        # quadrature weight times A(r) per node
    u: np.ndarray             # shape (len(t), len(r))
    l2: np.ndarray
    s_nodes: np.ndarray = field(repr=False, default=None)
    s_weights: np.ndarray = field(repr=False, default=None)
    hf: np.ndarray = field(repr=False, default=None)
    twisted: bool = False

    @property
    def l2_drift(self):
        base = self.l2[0]
        return float(np.max(np.abs(self.l2 - base)) / base)

    def spatial_norm(self, i, q):
        row = np.abs(self.u[i])
        if math.isinf(q):
            return float(np.max(row))
        return float(np.dot(self.r_meas, row ** q)) ** (1.0 / q)


def _radial_panels(r_max, width, order=8, r_lo=1e-3):
    xg, wg = gauss_legendre(order)
    bounds = np.arange(r_lo, r_max + 0.5 * width, width)
    mid = 0.5 * (bounds[1:] + bounds[:-1])
    half = 0.5 * (bounds[1:] - bounds[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    wts = (half[:, None] * wg[None, :]).ravel()
    return nodes, wts


def _spectral_nodes(p, s_max, r_max, *, order=8, refine=1.0):
    width = math.pi / (r_max + 1.0) / refine
    npanels = max(int(math.ceil(s_max / width)), 4)
    bounds = np.linspace(0.0, s_max, npanels + 1)
    xg, wg = gauss_legendre(order)
    mid = 0.5 * (bounds[1:] + bounds[:-1])
    half = 0.5 * (bounds[1:] - bounds[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    wts = (half[:, None] * wg[None, :]).ravel()
    return nodes, wts


class _Spectral:
    """Shared transform context: ℋf on s-nodes plus the phi matrix."""

    def __init__(self, p, f, *, r_max=60.0, r_width=0.5, s_max=None,
                 tol=1e-8, refine=1.0):
        self.p = p
        self.cal = calibrate(p)
        if s_max is None:
            s_max = self._probe_s_max(p, f, tol)
        self.s_max = s_max
        self.r, self.rw = _radial_panels(r_max, r_width)
        self.s, self.sw = _spectral_nodes(p, s_max, r_max, refine=refine)
        self.dens = density_values(p, self.s)
        self.hf, _ = spherical_transform(p, f, self.s)
        self.r_meas = self.rw * density_A(p, self.r)
        rows = []
        for s in self.s:
            u, _ = solve_phi_scaled(p, float(s), self.r)
            rows.append(u)
        self.phi_mat = np.asarray(rows) * np.exp(-0.5 * p.Q * self.r)[None, :]

    @staticmethod
    def _probe_s_max(p, f, tol):
        s = 4.0
        while s < _S_MAX_CAP:
            hv, _ = spherical_transform(p, f, np.array([s]))
            if abs(hv[0]) * density_values(p, s)[0] < 1e-2 * tol:
                return s
            s += 2.0
        return _S_MAX_CAP

    def synthesize(self, spectral):
        """Radial samples of c_S * int spectral(s) phi_s dens ds."""
        coeff = self.cal.c_S * self.sw * self.dens * spectral
        return coeff @ self.phi_mat


def _omega(p, s):
    return s * s + 0.25 * p.Q ** 2


def apply_multiplier(p, m, f, *, s_max=None, tol=1e-8):
    """m(-Delta_Q) f as a radial function via the transform pair.

    The returned evaluator synthesizes values on demand from the
    measured ℋf, so ℋ(result)(s) = m(s) ℋf(s) by construction up to
    quadrature error.
    """
    if not isinstance(m, Multiplier):
        m = Multiplier(m)
    m.check_bounded()
    ctx = _Spectral(p, f, s_max=s_max, tol=tol)
    spectral = np.asarray(m(ctx.s), dtype=complex) * ctx.hf
    coeff = ctx.cal.c_S * ctx.sw * ctx.dens * spectral

    def ev(r):
        rr = np.atleast_1d(np.asarray(r, dtype=float))
        acc = np.zeros(rr.shape, dtype=complex)
        for c, s in zip(coeff, ctx.s):
            u, _ = solve_phi_scaled(p, float(s), rr)
            acc += c * u
        return acc * np.exp(-0.5 * p.Q * rr)

    def ev_scaled(r):
        rr = np.atleast_1d(np.asarray(r, dtype=float))
        acc = np.zeros(rr.shape, dtype=complex)
        for c, s in zip(coeff, ctx.s):
            u, _ = solve_phi_scaled(p, float(s), rr)
            acc += c * u
        return acc

    return RadialFunction(ev, Decay(0.5 * p.Q, 0.0, 0.0, 0.5 * (p.n - 1)),
                          r_min=0.0, scaled_evaluator=ev_scaled)


def evolve_schrodinger(p, f, t_grid, *, r_max=60.0, r_width=0.5, s_max=None,
                       tol=1e-8, refine=1.0, initial="radial data"):
    """Free evolution u(t) = e^{it Delta} f sampled on (t, r) grids.

    One spectral measurement of f serves every time slice; each slice
    multiplies by e^{-it(s^2+Q^2/4)} and synthesizes.
    """
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    ctx = _Spectral(p, f, r_max=r_max, r_width=r_width, s_max=s_max,
                    tol=tol, refine=refine)
    om = _omega(p, ctx.s)
    u = np.empty((t.size, ctx.r.size), dtype=complex)
    for i, ti in enumerate(t):
        u[i] = ctx.synthesize(np.exp(-1j * ti * om) * ctx.hf)
    l2 = np.sqrt(np.maximum((np.abs(u) ** 2 @ ctx.r_meas).real, 0.0))
    return EvolutionRecord(p, initial, t, ctx.r, ctx.r_meas, u, l2,
                           ctx.s, ctx.sw, ctx.hf)


def evolve_distinguished(p, f_core, t_grid, **kw):
    """Twisted evolution for the distinguished Laplacian.

    f_core is the radial profile of the untwisted data delta^{-1/2} f.
    The record stores the radial core v(t); values of the twisted
    solution on the slice x = (0,0,a) come from distinguished_slice.
    """
    rec = evolve_schrodinger(p, f_core, t_grid,
                             initial="twisted core", **kw)
    rec.twisted = True
    return rec


def distinguished_slice(rec, i, a_values):
    """u(t_i, (0,0,a)) = e^{iQ^2 t/4} a^{-Q/2} v(t_i, |log a|).

    Interpolates the stored core linearly in r; a_values must satisfy
    |log a| <= the record's radial extent.
    """
    a = np.atleast_1d(np.asarray(a_values, dtype=float))
    if np.any(a <= 0):
        raise ValueError("slice coordinate a must be positive")
    r = np.abs(np.log(a))
    if np.any(r > rec.r[-1]):
        raise ValueError("slice point outside the record's radial grid")
    p = rec.params
    t = rec.t[i]
    core_re = np.interp(r, rec.r, rec.u[i].real)
    core_im = np.interp(r, rec.r, rec.u[i].imag)
    twist = np.exp(0.25j * p.Q ** 2 * t) * a ** (-0.5 * p.Q)
    return twist * (core_re + 1j * core_im)


def strichartz_window_norm(rec, pair, window):
    """(int_window ||u(t)||_q^p dt)^{1/p} on the record's time grid.

    Composite trapezoid in t; the window endpoints must be grid points
    so that window additivity holds exactly.  p = inf takes the sup of
    the spatial norms over the window.
    """
    lo, hi = window
    tl = np.searchsorted(rec.t, lo - 1e-12)
    th = np.searchsorted(rec.t, hi - 1e-12)
    if (tl >= rec.t.size or th >= rec.t.size
            or abs(rec.t[tl] - lo) > 1e-10 or abs(rec.t[th] - hi) > 1e-10):
        raise ValueError("window endpoints must lie on the record grid")
    q = pair.q
    norms = np.array([rec.spatial_norm(i, q) for i in range(tl, th + 1)])
    if math.isinf(pair.p):
        return float(np.max(norms))
    tt = rec.t[tl:th + 1]
    return float(np.trapezoid(norms ** pair.p, tt)) ** (1.0 / pair.p)


def _as_forcing(F):
    if isinstance(F, RadialFunction):
        return lambda t: F, True
    return F, False


def inhomogeneous_solution(p, f, F, t_grid, *, r_max=60.0, r_width=0.5,
                           s_max=None, tol=1e-3, max_halvings=5,
                           initial="duhamel"):
    """u(t) = e^{itΔ}f + int_0^t e^{i(t-s)Δ} F(s) ds on the record grids.

    The Duhamel integral runs on the spectral side with composite
    trapezoid over forcing times, halving the substep until the spectral
    profile moves less than tol relative to its sup (or the halving
    budget runs out).  f may be None for zero data; F is a
    RadialFunction (constant in time) or a callable t -> RadialFunction.
    """
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    forcing, constant = _as_forcing(F)
    probe = forcing(float(t[0]))
    ctx = _Spectral(p, probe if f is None else f, r_max=r_max,
                    r_width=r_width, s_max=s_max, tol=min(tol, 1e-6))
    om = _omega(p, ctx.s)
    hf0 = np.zeros_like(ctx.s, dtype=complex)
    if f is not None:
        hf0, _ = spherical_transform(p, f, ctx.s)

    hF_cache = {}

    def hF(ts):
        if constant:
            key = "const"
        else:
            key = round(float(ts), 12)
        if key not in hF_cache:
            vals, _ = spherical_transform(p, forcing(float(ts)), ctx.s)
            hF_cache[key] = vals
        return hF_cache[key]

    def duhamel(ti, nsub):
        if ti == 0.0:
            return np.zeros_like(ctx.s, dtype=complex)
        ss = np.linspace(0.0, ti, nsub + 1)
        vals = np.array([hF(x) * np.exp(-1j * (ti - x) * om) for x in ss])
        return np.trapezoid(vals, ss, axis=0)

    spectra = None
    nsub = max(8, len(t) - 1)
    for _ in range(max_halvings + 1):
        trial = [np.exp(-1j * ti * om) * hf0 + duhamel(ti, nsub)
                 for ti in t]
        if spectra is not None:
            num = max(float(np.max(np.abs(a - b)))
                      for a, b in zip(trial, spectra))
            den = max(float(np.max(np.abs(a))) for a in trial)
            spectra = trial
            if num <= tol * den:
                break
            nsub *= 2
        else:
            spectra = trial
            nsub *= 2
    u = np.array([ctx.synthesize(sp) for sp in spectra])
    l2 = np.sqrt(np.maximum((np.abs(u) ** 2 @ ctx.r_meas).real, 0.0))
    return EvolutionRecord(p, initial, t, ctx.r, ctx.r_meas, u, l2,
                           ctx.s, ctx.sw, hf0)
