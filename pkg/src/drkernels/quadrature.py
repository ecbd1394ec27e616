"""Quadrature and sequence-acceleration utilities.

Primary integrator: adaptive bisection of Gauss-Legendre panels with
vectorised integrand evaluation (one call per refinement level, all
pending nodes batched).  A scipy QUADPACK wrapper is kept as a second,
structurally independent backend; norm computations can be asked to use
either so results can be cross-checked between the two.

Semi-infinite integrals of decaying integrands walk geometrically
growing panels and raise NonConvergenceError, carrying the partial sum,
when the tail refuses to decay.
"""

import math
from functools import lru_cache

import numpy as np
import scipy.integrate


class NonConvergenceError(ArithmeticError):
    """Integral failed to converge; .partial holds the best partial value."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@lru_cache(maxsize=None)
def gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _panel_eval(fvec, lo, hi, order):
    """GL values of len(lo) panels in one integrand call; returns sums."""
    x, w = gauss_legendre(order)
    mid = 0.5 * (lo + hi)[:, None]
    half = 0.5 * (hi - lo)[:, None]
    nodes = (mid + half * x[None, :]).ravel()
    vals = np.asarray(fvec(nodes)).reshape(len(lo), order)
    return (vals * w[None, :]).sum(axis=1) * half[:, 0]


def integrate_panels(fvec, a, b, *, tol=1e-10, order=12, max_panels=20000):
    """Adaptive panel-bisection integral of a vectorised integrand on [a, b].

    `tol` is treated as an absolute target, with a relative floor of the
    same magnitude against the accumulated value.  Returns (value, err).
    """
    if b <= a:
        return 0.0 + 0.0j, 0.0
    lo = np.array([a], dtype=float)
    hi = np.array([b], dtype=float)
    parent = _panel_eval(fvec, lo, hi, order)
    total = 0.0 + 0.0j
    err_acc = 0.0
    n_done = 0
    work = [(a, b, parent[0])]
    while work:
        if n_done + 2 * len(work) > max_panels:
            raise NonConvergenceError(
                "panel budget exhausted on [%g, %g]" % (a, b),
                partial=total + sum(p[2] for p in work))
        los = np.array([w0[0] for w0 in work])
        his = np.array([w0[1] for w0 in work])
        mids = 0.5 * (los + his)
        clo = np.concatenate([los, mids])
        chi = np.concatenate([mids, his])
        child = _panel_eval(fvec, clo, chi, order)
        nw = len(work)
        nxt = []
        for i, (wa, wb, ival) in enumerate(work):
            fine = child[i] + child[i + nw]
            err = abs(fine - ival)
            span_tol = tol * max(1.0, abs(total)) * max((wb - wa) / (b - a), 1e-3)
            if err <= span_tol or (wb - wa) < 1e-13 * (b - a):
                total += fine
                err_acc += err
                n_done += 1
            else:
                nxt.append((wa, mids[i], child[i]))
                nxt.append((mids[i], wb, child[i + nw]))
        work = nxt
    return total, err_acc


def integrate_decaying(fvec, a, *, tol=1e-10, rate=1.0, order=12,
                       max_span=4000.0, panel_tol=None):
    """Integrate fvec on [a, inf) assuming eventual exponential-type decay.

    `rate` sets the initial panel width (about 2/rate).  Panels grow
    geometrically; the walk stops once two consecutive contributions
    fall below tol * |accumulated|.  If contributions stop decaying
    before max_span is reached, NonConvergenceError is raised with the
    partial value attached.
    """
    if panel_tol is None:
        panel_tol = tol
    h = max(min(2.0 / max(rate, 1e-3), 20.0), 1e-2)
    pos = a
    total = 0.0 + 0.0j
    err_acc = 0.0
    small = 0
    history = []
    while pos - a < max_span:
        val, err = integrate_panels(fvec, pos, pos + h, tol=panel_tol, order=order)
        total += val
        err_acc += err
        history.append(abs(val))
        scale = max(abs(total), 1e-300)
        if abs(val) <= tol * scale:
            small += 1
            if small >= 2:
                return total, err_acc
        else:
            small = 0
        if len(history) >= 12:
            recent = max(history[-4:])
            earlier = max(history[-12:-8])
            if recent > 0.7 * earlier and recent > 10.0 * tol * scale:
                raise NonConvergenceError(
                    "integrand does not decay on [%g, inf)" % a, partial=total)
        pos += h
        h *= 1.4
    raise NonConvergenceError(
        "span budget exhausted on [%g, inf)" % a, partial=total)


def integrate_quadpack(f_scalar, a, b, *, tol=1e-10):
    """QUADPACK backend: complex scalar integrand, finite or infinite b."""
    re, re_err = scipy.integrate.quad(lambda x: f_scalar(x).real, a, b,
                                      epsabs=tol, epsrel=tol, limit=400)
    im, im_err = scipy.integrate.quad(lambda x: f_scalar(x).imag, a, b,
                                      epsabs=tol, epsrel=tol, limit=400)
    return re + 1j * im, re_err + im_err


def wynn_epsilon(partial_sums):
    """Wynn epsilon acceleration of a (typically alternating) sequence.

    Takes the sequence of partial sums, returns (limit_estimate, err_est).
    Works for complex sequences; robust against the occasional zero
    denominator by propagating the previous entry.
    """
    s = [complex(v) for v in partial_sums]
    n = len(s)
    if n == 1:
        return s[0], abs(s[0])
    em = [0.0 + 0.0j] * (n + 1)
    e0 = list(s)
    best = s[-1]
    prev_best = s[-2]
    for col in range(1, n):
        e1 = []
        for i in range(n - col):
            denom = e0[i + 1] - e0[i]
            if denom == 0:
                e1.append(em[i + 1] if col > 1 else 0.0 + 0.0j)
            else:
                e1.append(em[i + 1] + 1.0 / denom)
        em = e0
        e0 = e1
        if col % 2 == 0 and e0:
            prev_best = best
            best = e0[-1]
    return best, abs(best - prev_best)


def neville_zero(xs, ys):
    """Polynomial extrapolation of (xs, ys) to x = 0 (Neville scheme).

    Returns (value, err_est); the error estimate is the difference from
    the one-lower-order extrapolant.
    """
    n = len(xs)
    tab = [complex(y) for y in ys]
    if n == 1:
        return tab[0], abs(tab[0])
    prev_level_head = tab[0]
    for level in range(1, n):
        for i in range(n - level):
            x0 = xs[i]
            x1 = xs[i + level]
            tab[i] = (x0 * tab[i + 1] - x1 * tab[i]) / (x0 - x1)
        if level == n - 2:
            prev_level_head = tab[0]
    return tab[0], abs(tab[0] - prev_level_head)
