"""Exact monomial calculus for the inverse Abel derivative chains.

The Gaussian seed e^{-r^2/4 tau} is differentiated through the two
weighted derivatives

    D1 = -(1/sinh r) d/dr,      D2 = -(1/sinh(r/2)) d/dr,

producing sums of monomials

    coeff * r^p * tau^{-j} * sinh^{e_sh} r * cosh^{e_ch} r
          * sinh^{e_sh2}(r/2) * cosh^{e_ch2}(r/2) * e^{-r^2/4 tau}

with exact rational coefficients.  No half-angle rewriting is done; the
six exponent slots are the whole state.  D1 and D2 do not commute, so
chains are applied right-to-left exactly as written.

Individual monomials blow up like negative powers of r at the origin
while the full sums stay finite; evaluation therefore refuses radii
below a configurable floor instead of silently cancelling digits.
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import backend

R_MIN_DEFAULT = 1e-3


@dataclass(frozen=True)
class Monomial:
    coeff: Fraction
    p: int
    j: int
    e_sh: int
    e_ch: int
    e_sh2: int
    e_ch2: int

    def exponent_key(self):
        return (self.p, self.j, self.e_sh, self.e_ch, self.e_sh2, self.e_ch2)

    def two_e(self):
        """Twice the net exponential rate of the hyperbolic factors."""
        return 2 * (self.e_sh + self.e_ch) + self.e_sh2 + self.e_ch2


def _canonical(terms):
    acc = {}
    for t in terms:
        key = t.exponent_key()
        acc[key] = acc.get(key, Fraction(0)) + t.coeff
    out = tuple(
        Monomial(c, *key) for key, c in sorted(acc.items()) if c != 0
    )
    return out


@dataclass(frozen=True)
class SymbolicSum:
    """Canonically merged, sorted tuple of monomials (Gaussian implicit)."""

    terms: tuple

    @staticmethod
    def of(terms):
        return SymbolicSum(_canonical(tuple(terms)))

    def __add__(self, other):
        return SymbolicSum.of(self.terms + other.terms)

    def scale(self, c):
        c = Fraction(c)
        return SymbolicSum(tuple(
            Monomial(t.coeff * c, *t.exponent_key()) for t in self.terms))

    @property
    def j_max(self):
        return max((t.j for t in self.terms), default=0)

    @property
    def j_values(self):
        return sorted({t.j for t in self.terms})


def gaussian_seed():
    """The bare Gaussian e^{-r^2/4 tau}."""
    return SymbolicSum((Monomial(Fraction(1), 0, 0, 0, 0, 0, 0),))


def _differentiate(s):
    """d/dr of a sum, Gaussian factor included."""
    out = []
    for t in s.terms:
        c, p, j, a1, a2, b1, b2 = (t.coeff, t.p, t.j, t.e_sh, t.e_ch,
                                   t.e_sh2, t.e_ch2)
        # chain rule through e^{-r^2/4 tau}: factor -r/(2 tau)
        out.append(Monomial(-c / 2, p + 1, j + 1, a1, a2, b1, b2))
        if p:
            out.append(Monomial(c * p, p - 1, j, a1, a2, b1, b2))
        if a1:
            out.append(Monomial(c * a1, p, j, a1 - 1, a2 + 1, b1, b2))
        if a2:
            out.append(Monomial(c * a2, p, j, a1 + 1, a2 - 1, b1, b2))
        if b1:
            out.append(Monomial(c * b1 / 2, p, j, a1, a2, b1 - 1, b2 + 1))
        if b2:
            out.append(Monomial(c * b2 / 2, p, j, a1, a2, b1 + 1, b2 - 1))
    return SymbolicSum.of(out)


def apply_D1(s):
    """D1 = -(1/sinh r) d/dr."""
    d = _differentiate(s)
    return SymbolicSum.of(
        Monomial(-t.coeff, t.p, t.j, t.e_sh - 1, t.e_ch, t.e_sh2, t.e_ch2)
        for t in d.terms)


def apply_D2(s):
    """D2 = -(1/sinh(r/2)) d/dr."""
    d = _differentiate(s)
    return SymbolicSum.of(
        Monomial(-t.coeff, t.p, t.j, t.e_sh, t.e_ch, t.e_sh2 - 1, t.e_ch2)
        for t in d.terms)


def apply_chain(n_d1, n_d2, s=None):
    """D1^{n_d1} D2^{n_d2} applied to `s` (default: the Gaussian seed).

    Rightmost operator acts first: all the D2 applications precede the
    D1 ones, matching the operator-product notation.
    """
    if s is None:
        s = gaussian_seed()
    for _ in range(n_d2):
        s = apply_D2(s)
    for _ in range(n_d1):
        s = apply_D1(s)
    return s


@lru_cache(maxsize=None)
def inverse_abel_chain(m, k):
    """The derivative chain of the inverse Abel transform for (m, k).

    Even k: D1^{k/2} D2^{m/2}; odd k: D1^{(k+1)/2} D2^{m/2} (the odd
    case is the integrand of the remaining one-dimensional integral).
    Every monomial of a chain of n_d1 + n_d2 applications shares the
    exponential weight -(n_d2/2 + n_d1) and tau-powers run over
    1..n_d1+n_d2 exactly; both facts are asserted here.
    """
    n_d1 = (k + 1) // 2 if k % 2 else k // 2
    n_d2 = m // 2
    s = apply_chain(n_d1, n_d2)
    order = n_d1 + n_d2
    assert s.j_values == list(range(1, order + 1))
    want = -(2 * n_d1 + n_d2)
    assert all(t.two_e() == want for t in s.terms)
    return s


@dataclass(frozen=True)
class CompiledSum:
    coeff: np.ndarray
    rpow: np.ndarray
    jpow: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    two_e: int


@lru_cache(maxsize=None)
def compile_sum(s):
    """Freeze a sum into float arrays; exactness is kept until this point.

    The 2^{-sum of exponents} factors from the exponential rewriting of
    the hyperbolics are folded into the coefficients in exact rational
    arithmetic before the single rounding to float64.
    """
    if not s.terms:
        raise ValueError("cannot compile an empty sum")
    te = {t.two_e() for t in s.terms}
    if len(te) != 1:
        raise ValueError("mixed exponential weights %r; compile blocks separately" % te)
    n = len(s.terms)
    coeff = np.empty(n)
    rpow = np.empty(n, dtype=np.int64)
    jpow = np.empty(n, dtype=np.int64)
    a1 = np.empty(n, dtype=np.int64)
    a2 = np.empty(n, dtype=np.int64)
    b1 = np.empty(n, dtype=np.int64)
    b2 = np.empty(n, dtype=np.int64)
    for i, t in enumerate(s.terms):
        folded = t.coeff * Fraction(2) ** (-(t.e_sh + t.e_ch + t.e_sh2 + t.e_ch2))
        coeff[i] = float(folded)
        rpow[i] = t.p
        jpow[i] = t.j
        a1[i] = t.e_sh
        a2[i] = t.e_ch
        b1[i] = t.e_sh2
        b2[i] = t.e_ch2
    return CompiledSum(coeff, rpow, jpow, a1, a2, b1, b2, te.pop())


def evaluate(s, r, tau, *, r_min=R_MIN_DEFAULT, shift=0.0, re_offset=0.0,
             pure_phase=False):
    """Evaluate a sum (Gaussian included) at radii r and complex time tau.

    Radii below r_min are refused: the monomials cancel catastrophically
    there.  `shift` multiplies the result by e^{shift*r}, `re_offset`
    by e^{re_offset}; `pure_phase` drops the modulus of the Gaussian
    factor, keeping only its oscillation.  Scalar r in, scalar out.
    """
    tau = complex(tau)
    if tau == 0 or tau.real < -1e-15:
        raise ValueError("tau must satisfy Re tau >= 0, tau != 0")
    scalar = np.isscalar(r) or np.asarray(r).ndim == 0
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    if r_arr.size and r_arr.min() < r_min * (1.0 - 1e-12):
        raise ValueError("radius %g below r_min=%g" % (r_arr.min(), r_min))
    c = compile_sum(s)
    zeta = complex(0.0, (0.25 / tau).imag) if pure_phase else None
    out = backend.eval_sum(c.coeff, c.rpow, c.jpow, c.a1, c.a2, c.b1,
                           c.b2, c.two_e, tau, shift, re_offset, r_arr,
                           zeta=zeta)
    return complex(out[0]) if scalar else out


def polynomial_part(s, j, *, shift=0.0):
    """The coefficient a_j(r) of tau^{-j}: terms with that power, the
    Gaussian and tau stripped.  Returns a plain vectorised evaluator.

    A nonzero shift evaluates a_j(r) e^{shift r} with every hyperbolic
    factor kept in log space, so growth-normalised envelopes stay
    representable even when individual factors would under- or overflow.
    """
    sel = [t for t in s.terms if t.j == j]

    def ev(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        acc = np.zeros_like(r)
        if shift == 0.0:
            for t in sel:
                acc = acc + float(t.coeff) * r ** t.p \
                    * np.sinh(r) ** t.e_sh * np.cosh(r) ** t.e_ch \
                    * np.sinh(0.5 * r) ** t.e_sh2 * np.cosh(0.5 * r) ** t.e_ch2
            return acc
        with np.errstate(divide="ignore"):
            lsh, lch = np.log(np.sinh(r)), np.log(np.cosh(r))
            lsh2, lch2 = np.log(np.sinh(0.5 * r)), np.log(np.cosh(0.5 * r))
            lr = np.log(r)
        for t in sel:
            ln = t.p * lr + t.e_sh * lsh + t.e_ch * lch \
                + t.e_sh2 * lsh2 + t.e_ch2 * lch2 + shift * r
            acc = acc + float(t.coeff) * np.exp(ln)
        return acc

    return ev


def to_json(s):
    """Debug dump: exponent tuples plus exact coefficient strings."""
    return json.dumps([
        {"coeff": str(t.coeff), "p": t.p, "j": t.j, "sh": t.e_sh,
         "ch": t.e_ch, "sh2": t.e_sh2, "ch2": t.e_ch2}
        for t in s.terms])
